#include "lexer.hpp"

#include <array>
#include <cctype>

namespace tunav::detail {

namespace {

// Longest first.
constexpr std::array<std::string_view, 30> kPuncts = {
    "<==>", "==>", "#![", "::", "->", "==", "!=", "<=", ">=", "&&", "||", "#[",
    "{", "}", "(", ")", "[", "]", "<", ">", ",", ";", ":", ".", "|", "!", "=", "+", "-", "*",
};

}  // namespace

std::vector<Token> lex(std::string_view src, const std::string& path) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;

  auto make_span = [&](std::size_t start, std::size_t end) {
    SourceSpan s;
    s.file = path;
    s.start_offset = start;
    s.end_offset = end;
    s.line = line;
    s.col = static_cast<int>(start - line_start) + 1;
    return s;
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      std::size_t start = i;
      i += 2;
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') {
          ++line;
          line_start = i + 1;
        }
        ++i;
      }
      if (i + 1 >= src.size()) throw ParseError(make_span(start, src.size()), "unterminated block comment");
      i += 2;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), make_span(start, i)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      std::string digits;
      for (std::size_t k = start; k < i; ++k)
        if (src[k] != '_') digits.push_back(src[k]);
      out.push_back({Tok::Int, digits, make_span(start, i)});
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (src.substr(i, p.size()) == p) {
        i += p.size();
        out.push_back({Tok::Punct, std::string(p), make_span(start, i)});
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (c == '/' || c == '%') {
        ++i;
        out.push_back({Tok::Punct, std::string(1, c), make_span(start, i)});
        continue;
      }
      throw ParseError(make_span(start, start + 1), std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", make_span(src.size(), src.size())});
  return out;
}

}  // namespace tunav::detail
