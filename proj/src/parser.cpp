#include <filesystem>

#include "lexer.hpp"
#include "tunav/syntax.hpp"

namespace tunav {

namespace {

using detail::Tok;
using detail::Token;

class Parser {
 public:
  Parser(std::string_view src, const std::string& path) : toks_(detail::lex(src, path)), path_(path) {}

  ProgramAst parse_file() {
    ProgramAst prog;
    prog.path = path_;
    prog.module_name = std::filesystem::path(path_).stem().string();
    if (is_ident("module")) {
      next();
      prog.module_name = parse_path();
      prog.explicit_module = true;
      expect(";");
    }
    while (!at_end()) prog.decls.push_back(parse_item());
    return prog;
  }

  Expr parse_standalone_expr() {
    Expr e = parse_expr();
    if (!at_end()) fail("expected end of expression");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string path_;

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  bool accept(std::string_view p) {
    if (is_punct(p)) {
      next();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    std::string found = peek().kind == Tok::End ? "end of file" : "'" + peek().text + "'";
    throw ParseError(peek().span, msg + ", found " + found);
  }
  const Token& expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    return next();
  }
  void expect_kw(std::string_view w) {
    if (!is_ident(w)) fail("expected '" + std::string(w) + "'");
    next();
  }
  std::string expect_ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return next().text;
  }

  static SourceSpan join(SourceSpan a, const SourceSpan& b) {
    a.end_offset = b.end_offset;
    return a;
  }

  std::string parse_path() {
    std::string p = expect_ident();
    while (is_punct("::") && peek(1).kind == Tok::Ident) {
      next();
      p += "::" + next().text;
    }
    return p;
  }

  Type parse_type() {
    Type t;
    t.name = expect_ident();
    if (accept("<")) {
      do {
        t.args.push_back(parse_type());
      } while (accept(","));
      expect(">");
    }
    return t;
  }

  std::vector<std::string> parse_type_params() {
    std::vector<std::string> tps;
    if (accept("<")) {
      do {
        tps.push_back(expect_ident());
      } while (accept(","));
      expect(">");
    }
    return tps;
  }

  std::vector<Param> parse_params() {
    std::vector<Param> ps;
    expect("(");
    if (!is_punct(")")) {
      do {
        if (is_punct(")")) break;
        Param p;
        p.span = peek().span;
        p.name = expect_ident();
        expect(":");
        p.type = parse_type();
        ps.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    return ps;
  }

  std::vector<std::string> parse_use_list(bool& braced) {
    std::vector<std::string> paths;
    braced = accept("{");
    if (braced) {
      while (!is_punct("}")) {
        paths.push_back(parse_path());
        if (!accept(",")) break;
      }
      expect("}");
    } else {
      paths.push_back(parse_path());
    }
    return paths;
  }

  // requires/ensures clause lists end at the next clause keyword, `{` or `;`.
  std::vector<Expr> parse_clause_list() {
    std::vector<Expr> out;
    while (!is_punct("{") && !is_punct(";") && !is_ident("ensures") && !is_ident("requires")) {
      out.push_back(parse_expr());
      if (!accept(",")) break;
    }
    return out;
  }

  void parse_spec_clauses(Decl& d) {
    if (is_ident("requires")) {
      next();
      d.requires_ = parse_clause_list();
    }
    if (is_ident("ensures")) {
      next();
      d.ensures = parse_clause_list();
    }
  }

  Decl parse_item() {
    Decl d;
    SourceSpan start = peek().span;
    if (is_ident("pub")) {
      next();
      d.is_pub = true;
    }
    if (is_ident("broadcast") && is_ident("group", 1)) {
      next();
      next();
      d.kind = DeclKind::BroadcastGroup;
      d.broadcast = true;
      d.name = expect_ident();
      expect("{");
      while (!is_punct("}")) {
        d.paths.push_back(parse_path());
        if (!accept(",")) break;
      }
      expect("}");
      d.span = join(start, prev().span);
      return d;
    }
    if (is_ident("broadcast") && is_ident("use", 1)) {
      next();
      next();
      d.kind = DeclKind::BroadcastUse;
      d.paths = parse_use_list(d.braced_use);
      expect(";");
      d.span = join(start, prev().span);
      return d;
    }
    if (is_ident("broadcast")) {
      next();
      d.broadcast = true;
    }
    if (is_ident("spec") && !d.broadcast) {
      next();
      expect_kw("fn");
      d.kind = DeclKind::SpecFn;
      d.name = expect_ident();
      d.type_params = parse_type_params();
      d.params = parse_params();
      expect("->");
      d.ret_type = parse_type();
      if (accept("{")) {
        d.spec_body = parse_expr();
        expect("}");
      } else {
        expect(";");
      }
      d.span = join(start, prev().span);
      return d;
    }
    if (is_ident("proof")) {
      next();
      expect_kw("fn");
      d.kind = DeclKind::ProofFn;
      d.name = expect_ident();
      d.type_params = parse_type_params();
      d.params = parse_params();
      parse_spec_clauses(d);
      d.body = parse_block();
      d.span = join(start, prev().span);
      return d;
    }
    if (is_ident("axiom")) {
      next();
      expect_kw("fn");
      d.kind = DeclKind::AxiomFn;
      d.name = expect_ident();
      d.type_params = parse_type_params();
      d.params = parse_params();
      parse_spec_clauses(d);
      expect(";");
      d.span = join(start, prev().span);
      return d;
    }
    if (d.broadcast) fail("expected 'proof fn', 'axiom fn', 'group' or 'use' after 'broadcast'");
    if (is_ident("sort")) {
      next();
      d.kind = DeclKind::SortDecl;
      d.name = expect_ident();
      d.type_params = parse_type_params();
      expect(";");
      d.span = join(start, prev().span);
      return d;
    }
    if (is_ident("const")) {
      next();
      d.kind = DeclKind::ConstDecl;
      d.name = expect_ident();
      expect(":");
      d.ret_type = parse_type();
      expect(";");
      d.span = join(start, prev().span);
      return d;
    }
    fail("expected a declaration");
  }

  std::vector<Stmt> parse_block() {
    expect("{");
    std::vector<Stmt> stmts;
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      stmts.push_back(parse_stmt());
    }
    expect("}");
    return stmts;
  }

  Stmt parse_stmt() {
    Stmt s;
    SourceSpan start = peek().span;
    if (is_ident("assert")) {
      next();
      if (is_punct("(")) {
        next();
        s.expr = parse_expr();
        expect(")");
      } else {
        s.expr = parse_expr();
      }
      if (is_ident("by")) {
        next();
        s.kind = StmtKind::AssertBy;
        s.body = parse_block();
        accept(";");
      } else {
        s.kind = StmtKind::Assert;
        expect(";");
      }
      s.span = join(start, prev().span);
      return s;
    }
    if (is_ident("let")) {
      next();
      s.kind = StmtKind::Let;
      s.let_name = expect_ident();
      if (accept(":")) s.let_type = parse_type();
      expect("=");
      s.expr = parse_expr();
      expect(";");
      s.span = join(start, prev().span);
      return s;
    }
    if (is_ident("broadcast") && is_ident("use", 1)) {
      next();
      next();
      s.kind = StmtKind::BroadcastUse;
      s.paths = parse_use_list(s.braced_use);
      expect(";");
      s.span = join(start, prev().span);
      return s;
    }
    s.kind = StmtKind::LemmaCall;
    s.expr = parse_expr();
    if (s.expr.kind != ExprKind::Call) throw ParseError(s.expr.span, "expected a statement");
    expect(";");
    s.span = join(start, prev().span);
    return s;
  }

  // ---- expressions ----

  Expr parse_expr() {
    if (is_ident("forall") || is_ident("exists")) return parse_quant();
    return parse_iff();
  }

  Expr parse_quant() {
    SourceSpan start = peek().span;
    ExprKind kind = next().text == "forall" ? ExprKind::Forall : ExprKind::Exists;
    expect("|");
    std::vector<Binder> binders;
    while (!is_punct("|")) {
      Binder b;
      b.span = peek().span;
      b.name = expect_ident();
      expect(":");
      b.type = parse_type();
      binders.push_back(std::move(b));
      if (!accept(",")) break;
    }
    expect("|");
    if (binders.empty()) throw ParseError(start, "quantifier without binders");
    bool all = false;
    if (accept("#![")) {
      std::string attr = expect_ident();
      if (attr != "all_triggers") throw ParseError(prev().span, "unknown quantifier attribute '" + attr + "'");
      expect("]");
      all = true;
    }
    Expr body = parse_expr();
    Expr q = Expr::quant(kind, std::move(binders), std::move(body));
    q.all_triggers = all;
    q.span = join(start, prev().span);
    return q;
  }

  Expr parse_iff() {
    Expr lhs = parse_implies();
    while (is_punct("<==>")) {
      next();
      Expr rhs = parse_operand([this] { return parse_implies(); });
      lhs = Expr::binary(BinaryOp::Iff, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  template <class F>
  Expr parse_operand(F f) {
    if (is_ident("forall") || is_ident("exists")) return parse_quant();
    return f();
  }

  Expr parse_implies() {
    Expr lhs = parse_or();
    if (is_punct("==>")) {
      next();
      Expr rhs = parse_operand([this] { return parse_implies(); });
      return Expr::binary(BinaryOp::Implies, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (is_punct("||")) {
      next();
      Expr rhs = parse_operand([this] { return parse_and(); });
      lhs = Expr::binary(BinaryOp::Or, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_cmp();
    while (is_punct("&&")) {
      next();
      Expr rhs = parse_operand([this] { return parse_cmp(); });
      lhs = Expr::binary(BinaryOp::And, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  std::optional<BinaryOp> cmp_op() const {
    if (peek().kind != Tok::Punct) return std::nullopt;
    const std::string& t = peek().text;
    if (t == "==") return BinaryOp::Eq;
    if (t == "!=") return BinaryOp::Ne;
    if (t == "<") return BinaryOp::Lt;
    if (t == "<=") return BinaryOp::Le;
    if (t == ">") return BinaryOp::Gt;
    if (t == ">=") return BinaryOp::Ge;
    return std::nullopt;
  }

  // Chained comparisons `a <= b < c` mean `a <= b && b < c`.
  Expr parse_cmp() {
    Expr first = parse_add();
    auto op = cmp_op();
    if (!op) return first;
    next();
    Expr second = parse_add();
    Expr result = Expr::binary(*op, first, second);
    Expr last = std::move(second);
    while (auto op2 = cmp_op()) {
      next();
      Expr rhs = parse_add();
      Expr link = Expr::binary(*op2, last, rhs);
      result = Expr::binary(BinaryOp::And, std::move(result), std::move(link));
      last = std::move(rhs);
    }
    return result;
  }

  Expr parse_add() {
    Expr lhs = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      BinaryOp op = next().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      Expr rhs = parse_mul();
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_mul() {
    Expr lhs = parse_unary();
    while (is_punct("*") || is_punct("/") || is_punct("%")) {
      const std::string& t = next().text;
      BinaryOp op = t == "*" ? BinaryOp::Mul : t == "/" ? BinaryOp::Div : BinaryOp::Mod;
      Expr rhs = parse_unary();
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_unary() {
    SourceSpan start = peek().span;
    if (accept("#[")) {
      std::string attr = expect_ident();
      if (attr != "trigger") throw ParseError(prev().span, "unknown attribute '" + attr + "'");
      expect("]");
      Expr e = parse_unary();
      e.trigger_mark = true;
      return e;
    }
    if (accept("!")) {
      Expr e = Expr::unary(UnaryOp::Not, parse_unary());
      e.span = join(start, prev().span);
      return e;
    }
    if (accept("-")) {
      Expr operand = parse_unary();
      if (operand.kind == ExprKind::IntLit && !operand.trigger_mark) {
        operand.int_value = -operand.int_value;
        operand.span = join(start, prev().span);
        return operand;
      }
      Expr e = Expr::unary(UnaryOp::Neg, std::move(operand));
      e.span = join(start, prev().span);
      return e;
    }
    return parse_postfix();
  }

  std::vector<Expr> parse_args() {
    std::vector<Expr> args;
    expect("(");
    while (!is_punct(")")) {
      args.push_back(parse_expr());
      if (!accept(",")) break;
    }
    expect(")");
    return args;
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    for (;;) {
      if (is_punct(".") && peek(1).kind == Tok::Ident) {
        next();
        std::string name = next().text;
        std::vector<Expr> args = parse_args();
        SourceSpan span = join(e.span, prev().span);
        args.insert(args.begin(), std::move(e));
        e = Expr::call(name, std::move(args));
        e.method_sugar = true;
        e.span = span;
        continue;
      }
      if (is_ident("as")) {
        // Casts between int and nat are no-ops in this logic.
        next();
        parse_type();
        continue;
      }
      break;
    }
    return e;
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      Expr e;
      try {
        e = Expr::int_lit(std::stoll(t.text));
      } catch (const std::out_of_range&) {
        throw ParseError(t.span, "integer literal out of range");
      }
      e.span = t.span;
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") {
        next();
        Expr e = Expr::bool_lit(t.text == "true");
        e.span = t.span;
        return e;
      }
      if (t.text == "forall" || t.text == "exists") return parse_quant();
      if (t.text == "if") return parse_if();
      SourceSpan start = t.span;
      std::string path = parse_path();
      if (is_punct("(")) {
        std::vector<Expr> args = parse_args();
        Expr e = Expr::call(path, std::move(args));
        e.span = join(start, prev().span);
        return e;
      }
      if (path.find("::") != std::string::npos) {
        Expr e = Expr::call(path, {});
        e.span = join(start, prev().span);
        return e;
      }
      Expr e = Expr::var(path);
      e.span = start;
      return e;
    }
    if (accept("(")) {
      SourceSpan start = prev().span;
      Expr e = parse_expr();
      expect(")");
      if (!e.trigger_mark) e.span = join(start, prev().span);
      return e;
    }
    fail("expected an expression");
  }

  Expr parse_if() {
    SourceSpan start = peek().span;
    next();
    Expr c = parse_expr();
    expect("{");
    Expr a = parse_expr();
    expect("}");
    expect_kw("else");
    Expr b;
    if (is_ident("if")) {
      b = parse_if();
    } else {
      expect("{");
      b = parse_expr();
      expect("}");
    }
    Expr e = Expr::ite(std::move(c), std::move(a), std::move(b));
    e.span = join(start, prev().span);
    return e;
  }
};

}  // namespace

ProgramAst parse_module(std::string_view source, const std::string& path) {
  Parser p(source, path);
  return p.parse_file();
}

Expr parse_expr(std::string_view source, const std::string& path) {
  Parser p(source, path);
  return p.parse_standalone_expr();
}

}  // namespace tunav
