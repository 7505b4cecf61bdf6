#include <sstream>
#include <stdexcept>

#include "tunav/syntax.hpp"

namespace tunav {

namespace {

enum Prec : int { kQuant = 0, kIff, kImplies, kOr, kAnd, kCmp, kAdd, kMul, kUnary, kPostfix, kPrimary };

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Iff: return kIff;
    case BinaryOp::Implies: return kImplies;
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return kMul;
    default: return kCmp;
  }
}

int expr_prec(const Expr& e) {
  if (e.trigger_mark) return kUnary;
  switch (e.kind) {
    case ExprKind::IntLit: return e.int_value < 0 ? kUnary : kPrimary;
    case ExprKind::Binary: return binary_prec(e.op);
    case ExprKind::Unary: return kUnary;
    case ExprKind::Forall:
    case ExprKind::Exists: return kQuant;
    case ExprKind::Call: return e.method_sugar && !e.args.empty() ? kPostfix : kPrimary;
    default: return kPrimary;
  }
}

void print(std::ostream& os, const Expr& e, int ctx);

void print_untagged(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: os << e.int_value; return;
    case ExprKind::BoolLit: os << (e.bool_value ? "true" : "false"); return;
    case ExprKind::Var: os << e.name; return;
    case ExprKind::Call: {
      std::size_t first = 0;
      if (e.method_sugar && !e.args.empty()) {
        print(os, e.args[0], kPostfix);
        os << "." << e.name;
        first = 1;
      } else {
        os << e.name;
      }
      os << "(";
      for (std::size_t i = first; i < e.args.size(); ++i) {
        if (i > first) os << ", ";
        print(os, e.args[i], kQuant);
      }
      os << ")";
      return;
    }
    case ExprKind::Binary: {
      int p = binary_prec(e.op);
      int lctx = p, rctx = p + 1;
      if (e.op == BinaryOp::Implies) {
        lctx = p + 1;
        rctx = p;
      } else if (p == kCmp) {
        lctx = rctx = p + 1;
      }
      print(os, e.lhs(), lctx);
      os << " " << op_text(e.op) << " ";
      print(os, e.rhs(), rctx);
      return;
    }
    case ExprKind::Unary: {
      os << (e.uop == UnaryOp::Not ? "!" : "-");
      const Expr& x = e.args[0];
      if (e.uop == UnaryOp::Neg && x.kind == ExprKind::IntLit && !x.trigger_mark) {
        os << "(" << x.int_value << ")";
      } else {
        print(os, x, kUnary);
      }
      return;
    }
    case ExprKind::Ite:
      os << "if ";
      print(os, e.args[0], kQuant);
      os << " { ";
      print(os, e.args[1], kQuant);
      os << " } else { ";
      print(os, e.args[2], kQuant);
      os << " }";
      return;
    case ExprKind::Forall:
    case ExprKind::Exists: {
      os << (e.kind == ExprKind::Forall ? "forall|" : "exists|");
      for (std::size_t i = 0; i < e.binders.size(); ++i) {
        if (i) os << ", ";
        os << e.binders[i].name << ": " << e.binders[i].type.to_string();
      }
      os << "| ";
      if (e.all_triggers) os << "#![all_triggers] ";
      print(os, e.body(), kQuant);
      return;
    }
  }
}

void print(std::ostream& os, const Expr& e, int ctx) {
  bool paren = expr_prec(e) < ctx;
  if (paren) os << "(";
  if (e.trigger_mark) {
    os << "#[trigger] ";
    Expr inner = e;
    inner.trigger_mark = false;
    bool ip = expr_prec(inner) < kUnary;
    if (ip) os << "(";
    print_untagged(os, inner);
    if (ip) os << ")";
  } else {
    print_untagged(os, e);
  }
  if (paren) os << ")";
}

void indent(std::ostream& os, int n) {
  for (int i = 0; i < n; ++i) os << "    ";
}

std::string join_paths(const std::vector<std::string>& paths) {
  std::string s;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i) s += ", ";
    s += paths[i];
  }
  return s;
}

void print_stmts(std::ostream& os, const std::vector<Stmt>& stmts, int depth);

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  switch (s.kind) {
    case StmtKind::Assert:
      os << "assert(" << render_expr(s.expr) << ");\n";
      break;
    case StmtKind::AssertBy:
      os << "assert(" << render_expr(s.expr) << ") by {\n";
      print_stmts(os, s.body, depth + 1);
      indent(os, depth);
      os << "}\n";
      break;
    case StmtKind::Let:
      os << "let " << s.let_name;
      if (s.let_type) os << ": " << s.let_type->to_string();
      os << " = " << render_expr(s.expr) << ";\n";
      break;
    case StmtKind::LemmaCall:
      os << render_expr(s.expr) << ";\n";
      break;
    case StmtKind::BroadcastUse:
      if (s.braced_use)
        os << "broadcast use {" << join_paths(s.paths) << "};\n";
      else
        os << "broadcast use " << join_paths(s.paths) << ";\n";
      break;
  }
}

void print_stmts(std::ostream& os, const std::vector<Stmt>& stmts, int depth) {
  for (const auto& s : stmts) print_stmt(os, s, depth);
}

void print_signature(std::ostream& os, const Decl& d) {
  os << d.name;
  if (!d.type_params.empty()) {
    os << "<";
    for (std::size_t i = 0; i < d.type_params.size(); ++i) os << (i ? ", " : "") << d.type_params[i];
    os << ">";
  }
  os << "(";
  for (std::size_t i = 0; i < d.params.size(); ++i) {
    if (i) os << ", ";
    os << d.params[i].name << ": " << d.params[i].type.to_string();
  }
  os << ")";
}

void print_clauses(std::ostream& os, const char* kw, const std::vector<Expr>& es) {
  if (es.empty()) return;
  os << "\n    " << kw;
  for (const auto& e : es) os << "\n        " << render_expr(e) << ",";
}

void print_decl(std::ostream& os, const Decl& d) {
  if (d.is_pub) os << "pub ";
  switch (d.kind) {
    case DeclKind::SpecFn:
      os << "spec fn ";
      print_signature(os, d);
      os << " -> " << d.ret_type->to_string();
      if (d.spec_body)
        os << " {\n    " << render_expr(*d.spec_body) << "\n}\n";
      else
        os << ";\n";
      break;
    case DeclKind::ProofFn:
      if (d.broadcast) os << "broadcast ";
      os << "proof fn ";
      print_signature(os, d);
      print_clauses(os, "requires", d.requires_);
      print_clauses(os, "ensures", d.ensures);
      os << "\n{\n";
      print_stmts(os, d.body, 1);
      os << "}\n";
      break;
    case DeclKind::AxiomFn:
      if (d.broadcast) os << "broadcast ";
      os << "axiom fn ";
      print_signature(os, d);
      print_clauses(os, "requires", d.requires_);
      print_clauses(os, "ensures", d.ensures);
      os << ";\n";
      break;
    case DeclKind::BroadcastGroup:
      os << "broadcast group " << d.name << " {\n";
      for (const auto& p : d.paths) os << "    " << p << ",\n";
      os << "}\n";
      break;
    case DeclKind::BroadcastUse:
      if (d.braced_use)
        os << "broadcast use {" << join_paths(d.paths) << "};\n";
      else
        os << "broadcast use " << join_paths(d.paths) << ";\n";
      break;
    case DeclKind::SortDecl:
      os << "sort " << d.name;
      if (!d.type_params.empty()) {
        os << "<";
        for (std::size_t i = 0; i < d.type_params.size(); ++i) os << (i ? ", " : "") << d.type_params[i];
        os << ">";
      }
      os << ";\n";
      break;
    case DeclKind::ConstDecl:
      os << "const " << d.name << ": " << d.ret_type->to_string() << ";\n";
      break;
  }
}

bool same_site(const SourceSpan& a, const SourceSpan& b) {
  return a.file == b.file && a.start_offset == b.start_offset;
}

bool remove_in(std::vector<Stmt>& stmts, const SourceSpan& site) {
  for (auto it = stmts.begin(); it != stmts.end(); ++it) {
    if ((it->kind == StmtKind::Assert || it->kind == StmtKind::AssertBy) && same_site(it->span, site)) {
      stmts.erase(it);
      return true;
    }
    if (it->kind == StmtKind::AssertBy && remove_in(it->body, site)) return true;
  }
  return false;
}

bool contains_site(const std::vector<Stmt>& stmts, const SourceSpan& site) {
  for (const auto& s : stmts) {
    if ((s.kind == StmtKind::Assert || s.kind == StmtKind::AssertBy) && same_site(s.span, site)) return true;
    if (s.kind == StmtKind::AssertBy && contains_site(s.body, site)) return true;
  }
  return false;
}

}  // namespace

std::string render_expr(const Expr& e) {
  std::ostringstream os;
  print(os, e, kQuant);
  return os.str();
}

std::string render(const ProgramAst& program) {
  std::ostringstream os;
  if (program.explicit_module) os << "module " << program.module_name << ";\n\n";
  for (std::size_t i = 0; i < program.decls.size(); ++i) {
    if (i) os << "\n";
    print_decl(os, program.decls[i]);
  }
  return os.str();
}

ProgramAst remove_sites(const ProgramAst& program, const std::set<SourceSpan>& removed) {
  ProgramAst out = program;
  for (const auto& site : removed) {
    bool known = false;
    for (const auto& d : program.decls)
      if (d.kind == DeclKind::ProofFn && contains_site(d.body, site)) known = true;
    if (!known) throw std::invalid_argument(site.to_string() + ": not an assert site");
  }
  for (const auto& site : removed) {
    for (auto& d : out.decls) {
      if (d.kind == DeclKind::ProofFn && remove_in(d.body, site)) break;
    }
  }
  return out;
}

std::string render_without_sites(const ProgramAst& program, const std::set<SourceSpan>& removed) {
  return render(remove_sites(program, removed));
}

}  // namespace tunav
