#include <functional>
#include <sstream>

#include "tunav/syntax.hpp"

namespace tunav {

std::string SourceSpan::to_string() const {
  std::ostringstream os;
  os << file << ":" << line << ":" << col;
  return os.str();
}

std::string Type::to_string() const {
  if (args.empty()) return name;
  std::string s = name + "<";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i].to_string();
  }
  return s + ">";
}

ParseError::ParseError(SourceSpan span, const std::string& message)
    : std::runtime_error(span.to_string() + ": " + message), span_(std::move(span)) {}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    case BinaryOp::Implies: return "==>";
    case BinaryOp::Iff: return "<==>";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  return op == BinaryOp::Eq || op == BinaryOp::Ne || op == BinaryOp::Lt || op == BinaryOp::Le ||
         op == BinaryOp::Gt || op == BinaryOp::Ge;
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul || op == BinaryOp::Div ||
         op == BinaryOp::Mod;
}

bool is_connective(BinaryOp op) {
  return op == BinaryOp::And || op == BinaryOp::Or || op == BinaryOp::Implies || op == BinaryOp::Iff;
}

Expr Expr::int_lit(std::int64_t v) {
  Expr e;
  e.kind = ExprKind::IntLit;
  e.int_value = v;
  e.type = Type{"int", {}};
  return e;
}

Expr Expr::bool_lit(bool v) {
  Expr e;
  e.kind = ExprKind::BoolLit;
  e.bool_value = v;
  e.type = Type{"bool", {}};
  return e;
}

Expr Expr::var(std::string name, Type type) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  e.type = std::move(type);
  return e;
}

Expr Expr::call(std::string name, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::Call;
  e.name = std::move(name);
  e.args = std::move(args);
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = op;
  e.span = lhs.span;
  if (rhs.span.end_offset > e.span.end_offset) e.span.end_offset = rhs.span.end_offset;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  if (is_arithmetic(op)) {
    e.type = Type{"int", {}};
  } else {
    e.type = Type{"bool", {}};
  }
  return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.uop = op;
  e.span = operand.span;
  e.type = op == UnaryOp::Not ? Type{"bool", {}} : Type{"int", {}};
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::ite(Expr c, Expr t, Expr f) {
  Expr e;
  e.kind = ExprKind::Ite;
  e.span = c.span;
  e.type = t.type;
  e.args.push_back(std::move(c));
  e.args.push_back(std::move(t));
  e.args.push_back(std::move(f));
  return e;
}

Expr Expr::quant(ExprKind kind, std::vector<Binder> binders, Expr body) {
  Expr e;
  e.kind = kind;
  e.span = body.span;
  e.binders = std::move(binders);
  e.type = Type{"bool", {}};
  e.args.push_back(std::move(body));
  return e;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.trigger_mark != b.trigger_mark || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::IntLit:
      if (a.int_value != b.int_value) return false;
      break;
    case ExprKind::BoolLit:
      if (a.bool_value != b.bool_value) return false;
      break;
    case ExprKind::Var:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Call:
      if (a.name != b.name) return false;
      if (!a.symbol.empty() && !b.symbol.empty() && a.symbol != b.symbol) return false;
      break;
    case ExprKind::Binary:
      if (a.op != b.op) return false;
      break;
    case ExprKind::Unary:
      if (a.uop != b.uop) return false;
      break;
    case ExprKind::Ite:
      break;
    case ExprKind::Forall:
    case ExprKind::Exists:
      if (a.all_triggers != b.all_triggers || a.binders.size() != b.binders.size()) return false;
      for (std::size_t i = 0; i < a.binders.size(); ++i)
        if (a.binders[i].name != b.binders[i].name || a.binders[i].type != b.binders[i].type) return false;
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  return true;
}

std::size_t structural_hash(const Expr& e) {
  std::size_t h = std::hash<int>{}(static_cast<int>(e.kind));
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  switch (e.kind) {
    case ExprKind::IntLit: mix(std::hash<std::int64_t>{}(e.int_value)); break;
    case ExprKind::BoolLit: mix(e.bool_value ? 1 : 2); break;
    case ExprKind::Var: mix(std::hash<std::string>{}(e.name)); break;
    case ExprKind::Call: mix(std::hash<std::string>{}(e.symbol.empty() ? e.name : e.symbol)); break;
    case ExprKind::Binary: mix(static_cast<std::size_t>(e.op)); break;
    case ExprKind::Unary: mix(static_cast<std::size_t>(e.uop) + 100); break;
    default: break;
  }
  for (const auto& a : e.args) mix(structural_hash(a));
  return h;
}

namespace {

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

bool stmt_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && structurally_equal(a.expr, b.expr) && a.let_name == b.let_name &&
         a.let_type == b.let_type && a.paths == b.paths && stmts_equal(a.body, b.body);
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!stmt_equal(a[i], b[i])) return false;
  return true;
}

bool exprs_equal(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a[i], b[i])) return false;
  return true;
}

void strip_expr(Expr& e) {
  e.trigger_mark = false;
  e.all_triggers = false;
  for (auto& a : e.args) strip_expr(a);
}

void strip_stmts(std::vector<Stmt>& stmts) {
  for (auto& s : stmts) {
    strip_expr(s.expr);
    strip_stmts(s.body);
  }
}

}  // namespace

bool structurally_equal(const ProgramAst& a, const ProgramAst& b) {
  if (a.module_name != b.module_name || a.decls.size() != b.decls.size()) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const Decl& x = a.decls[i];
    const Decl& y = b.decls[i];
    if (x.kind != y.kind || x.is_pub != y.is_pub || x.broadcast != y.broadcast || x.name != y.name ||
        x.type_params != y.type_params || x.ret_type != y.ret_type || x.paths != y.paths)
      return false;
    if (x.params.size() != y.params.size()) return false;
    for (std::size_t k = 0; k < x.params.size(); ++k)
      if (x.params[k].name != y.params[k].name || x.params[k].type != y.params[k].type) return false;
    if (x.spec_body.has_value() != y.spec_body.has_value()) return false;
    if (x.spec_body && !structurally_equal(*x.spec_body, *y.spec_body)) return false;
    if (!exprs_equal(x.requires_, y.requires_) || !exprs_equal(x.ensures, y.ensures)) return false;
    if (!stmts_equal(x.body, y.body)) return false;
  }
  return true;
}

void strip_trigger_marks(ProgramAst& program) {
  for (auto& d : program.decls) {
    if (d.spec_body) strip_expr(*d.spec_body);
    for (auto& e : d.requires_) strip_expr(e);
    for (auto& e : d.ensures) strip_expr(e);
    strip_stmts(d.body);
  }
}

}  // namespace tunav
