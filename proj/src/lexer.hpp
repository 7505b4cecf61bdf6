#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tunav/syntax.hpp"

namespace tunav::detail {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

std::vector<Token> lex(std::string_view source, const std::string& path);

}  // namespace tunav::detail
