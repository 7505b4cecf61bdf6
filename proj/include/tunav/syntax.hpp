#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tunav {

struct SourceSpan {
  std::string file;
  std::size_t start_offset = 0;
  std::size_t end_offset = 0;
  int line = 0;
  int col = 0;

  std::string to_string() const;
  bool operator==(const SourceSpan&) const = default;
  auto operator<=>(const SourceSpan&) const = default;
};

/// A surface type: `int`, `nat`, `bool`, a declared sort, or a type parameter.
struct Type {
  std::string name;
  std::vector<Type> args;

  bool is_int() const { return name == "int" || name == "nat"; }
  bool is_bool() const { return name == "bool"; }
  std::string to_string() const;
  bool operator==(const Type&) const = default;
  bool operator<(const Type& o) const {
    if (name != o.name) return name < o.name;
    return std::lexicographical_compare(args.begin(), args.end(), o.args.begin(), o.args.end());
  }
};

enum class ExprKind { IntLit, BoolLit, Var, Call, Binary, Unary, Ite, Forall, Exists };

enum class BinaryOp {
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or, Implies, Iff,
};

enum class UnaryOp { Not, Neg };

const char* op_text(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_connective(BinaryOp op);

struct Binder {
  std::string name;
  Type type;
  SourceSpan span;
};

struct Expr;

/// One trigger group: pattern subterms that together mention every binder.
using TriggerPatterns = std::vector<Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceSpan span;

  std::int64_t int_value = 0;
  bool bool_value = false;
  // Var: variable name. Call: callee path as written (`a::b::f`).
  std::string name;
  BinaryOp op = BinaryOp::Add;
  UnaryOp uop = UnaryOp::Not;
  // Call arguments, Binary {lhs, rhs}, Unary {operand}, Ite {cond, then, else},
  // Forall/Exists {body}.
  std::vector<Expr> args;
  std::vector<Binder> binders;

  bool trigger_mark = false;   // `#[trigger]`
  bool all_triggers = false;   // `#![all_triggers]` on a quantifier
  bool method_sugar = false;   // written as `recv.name(...)`; rendering only

  // Filled by resolution.
  std::string symbol;  // monomorphized callee symbol
  Type type;

  // Filled by trigger selection on Forall/Exists nodes.
  std::vector<TriggerPatterns> triggers;

  const Expr& lhs() const { return args[0]; }
  const Expr& rhs() const { return args[1]; }
  const Expr& body() const { return args[0]; }

  static Expr int_lit(std::int64_t v);
  static Expr bool_lit(bool v);
  static Expr var(std::string name, Type type = {});
  static Expr call(std::string name, std::vector<Expr> args);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr ite(Expr c, Expr t, Expr e);
  static Expr quant(ExprKind kind, std::vector<Binder> binders, Expr body);
};

/// Structural equality: ignores spans, method sugar and resolution fields.
bool structurally_equal(const Expr& a, const Expr& b);
std::size_t structural_hash(const Expr& e);

enum class StmtKind { Assert, AssertBy, Let, LemmaCall, BroadcastUse };

struct Stmt {
  StmtKind kind = StmtKind::Assert;
  SourceSpan span;
  Expr expr;  // assert head, let value, or the lemma call
  std::string let_name;
  std::optional<Type> let_type;
  std::vector<Stmt> body;  // AssertBy block
  std::vector<std::string> paths;  // BroadcastUse
  bool braced_use = true;
};

enum class DeclKind { SpecFn, ProofFn, AxiomFn, BroadcastGroup, BroadcastUse, SortDecl, ConstDecl };

struct Param {
  std::string name;
  Type type;
  SourceSpan span;
};

struct Decl {
  DeclKind kind = DeclKind::SpecFn;
  SourceSpan span;
  bool is_pub = false;
  bool broadcast = false;
  std::string name;
  std::vector<std::string> type_params;
  std::vector<Param> params;
  std::optional<Type> ret_type;
  std::optional<Expr> spec_body;   // SpecFn with a body
  std::vector<Expr> requires_;
  std::vector<Expr> ensures;
  std::vector<Stmt> body;          // ProofFn
  std::vector<std::string> paths;  // BroadcastGroup members / BroadcastUse items
  bool braced_use = true;
};

struct ProgramAst {
  std::string path;
  std::string module_name;
  bool explicit_module = false;
  std::vector<Decl> decls;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceSpan span, const std::string& message);
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

/// Parses one `.tv` source file. The module name defaults to the file stem
/// unless the file starts with `module a::b;`.
ProgramAst parse_module(std::string_view source, const std::string& path);

/// Parses a standalone expression (used by tests and tooling).
Expr parse_expr(std::string_view source, const std::string& path = "<expr>");

std::string render_expr(const Expr& e);
std::string render(const ProgramAst& program);

/// Pretty-prints `program` with the assert sites starting at the given spans
/// removed. Throws std::invalid_argument if a span names no assert site.
std::string render_without_sites(const ProgramAst& program, const std::set<SourceSpan>& removed);

/// AST with the given assert sites deleted (same rules as render_without_sites).
ProgramAst remove_sites(const ProgramAst& program, const std::set<SourceSpan>& removed);

bool structurally_equal(const ProgramAst& a, const ProgramAst& b);

/// Clears every `#[trigger]` mark and `#![all_triggers]` attribute.
void strip_trigger_marks(ProgramAst& program);

}  // namespace tunav
