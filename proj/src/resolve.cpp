#include "tunav/resolve.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>

namespace tunav {

ResolveError::ResolveError(SourceSpan span, const std::string& message)
    : std::runtime_error(span.to_string() + ": " + message), span_(std::move(span)) {}

namespace {

std::string join_members(const std::vector<std::string>& members) {
  std::string s;
  for (std::size_t i = 0; i < members.size(); ++i) s += (i ? ", " : "") + members[i];
  return s;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> members)
    : std::runtime_error("cyclic broadcast dependency between {" + join_members(members) + "}"),
      members_(std::move(members)) {}

Type sort_of(const Type& t) {
  Type out;
  out.name = t.name == "nat" ? "int" : t.name;
  for (const auto& a : t.args) out.args.push_back(sort_of(a));
  return out;
}

const ModuleInfo* Program::module(const std::string& name) const {
  for (const auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

namespace {

bool is_builtin_type(const std::string& n) { return n == "int" || n == "nat" || n == "bool"; }

bool ends_with_path(const std::string& full, const std::string& suffix) {
  if (full == suffix) return true;
  if (full.size() <= suffix.size() + 2) return false;
  return full.compare(full.size() - suffix.size(), suffix.size(), suffix) == 0 &&
         full.compare(full.size() - suffix.size() - 2, 2, "::") == 0;
}

std::string mangle(const std::string& path, const std::vector<Type>& type_args) {
  if (type_args.empty()) return path;
  std::string s = path + "<";
  for (std::size_t i = 0; i < type_args.size(); ++i) s += (i ? ", " : "") + type_args[i].to_string();
  return s + ">";
}

struct DeclRef {
  const Decl* decl = nullptr;
  const ProgramAst* ast = nullptr;
  std::string path;
  std::size_t source_index = 0;
};

bool is_type_var(const Type& t) { return !t.name.empty() && t.name[0] == '?'; }

Type substitute(const Type& t, const std::map<std::string, Type>& subst) {
  if (is_type_var(t)) {
    auto it = subst.find(t.name);
    return it == subst.end() ? t : it->second;
  }
  Type out{t.name, {}};
  for (const auto& a : t.args) out.args.push_back(substitute(a, subst));
  return out;
}

bool unify(const Type& pattern, const Type& actual, std::map<std::string, Type>& bindings) {
  if (is_type_var(pattern)) {
    Type a = sort_of(actual);
    auto it = bindings.find(pattern.name);
    if (it == bindings.end()) {
      bindings.emplace(pattern.name, a);
      return true;
    }
    return it->second == a;
  }
  if (sort_of(pattern).name != sort_of(actual).name || pattern.args.size() != actual.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!unify(pattern.args[i], actual.args[i], bindings)) return false;
  return true;
}

bool same_sort(const Type& a, const Type& b) { return sort_of(a) == sort_of(b); }

class Resolver {
 public:
  explicit Resolver(const std::vector<ProgramAst>& asts) : asts_(asts) {}

  Program run() {
    collect();
    resolve_uses_and_groups();
    // Non-generic declarations first; they determine the type universe.
    for (const auto& path : order_) {
      const DeclRef& r = decls_.at(path);
      if (is_fn(*r.decl) && r.decl->type_params.empty()) instantiate(path, {}, r.decl->span);
    }
    drain();
    instantiate_generic_lemmas();
    drain();
    check_lemma_recursion();
    for (std::size_t i = 0; i < prog_.functions.size(); ++i) {
      prog_.instances_of[prog_.functions[i].path].push_back(i);
    }
    return std::move(prog_);
  }

 private:
  const std::vector<ProgramAst>& asts_;
  Program prog_;
  std::map<std::string, DeclRef> decls_;
  std::vector<std::string> order_;
  std::deque<std::size_t> worklist_;
  std::set<Type> observed_sorts_;

  static bool is_fn(const Decl& d) {
    return d.kind == DeclKind::SpecFn || d.kind == DeclKind::ProofFn || d.kind == DeclKind::AxiomFn ||
           d.kind == DeclKind::ConstDecl;
  }

  void collect() {
    std::size_t idx = 0;
    for (const auto& ast : asts_) {
      ModuleInfo* mod = nullptr;
      for (auto& m : prog_.modules)
        if (m.name == ast.module_name) mod = &m;
      if (!mod) {
        prog_.modules.push_back(ModuleInfo{ast.module_name, ast.path, {}, {}});
      }
      for (const auto& d : ast.decls) {
        if (d.kind == DeclKind::BroadcastUse) continue;
        std::string path = ast.module_name + "::" + d.name;
        if (decls_.count(path)) throw ResolveError(d.span, "duplicate definition of '" + path + "'");
        decls_[path] = DeclRef{&d, &ast, path, idx++};
        order_.push_back(path);
        if (d.kind == DeclKind::SortDecl) prog_.sort_paths.insert(path);
      }
    }
  }

  // Candidate declarations for a path written in module `module`.
  std::vector<std::string> lookup(const std::string& written, const std::string& module,
                                  const std::function<bool(const Decl&)>& filter) const {
    auto ok = [&](const std::string& p) {
      auto it = decls_.find(p);
      return it != decls_.end() && filter(*it->second.decl);
    };
    if (ok(written)) return {written};
    if (ok(module + "::" + written)) return {module + "::" + written};
    std::vector<std::string> out;
    for (const auto& p : order_)
      if (ends_with_path(p, written) && filter(*decls_.at(p).decl)) out.push_back(p);
    return out;
  }

  static bool broadcastable(const Decl& d) {
    return d.kind == DeclKind::BroadcastGroup ||
           ((d.kind == DeclKind::ProofFn || d.kind == DeclKind::AxiomFn) && d.broadcast);
  }

  std::string resolve_broadcast_path(const std::string& written, const std::string& module,
                                     const SourceSpan& span) const {
    auto any = lookup(written, module, [](const Decl&) { return true; });
    if (any.empty()) throw ResolveError(span, "unresolved path '" + written + "'");
    auto good = lookup(written, module, broadcastable);
    if (good.empty()) throw ResolveError(span, "'" + written + "' is not a broadcastable fact");
    if (good.size() > 1) throw ResolveError(span, "ambiguous path '" + written + "'");
    return good[0];
  }

  void resolve_uses_and_groups() {
    for (const auto& ast : asts_) {
      ModuleInfo* mod = nullptr;
      for (auto& m : prog_.modules)
        if (m.name == ast.module_name) mod = &m;
      for (const auto& d : ast.decls) {
        if (d.kind == DeclKind::BroadcastUse) {
          for (const auto& p : d.paths) mod->uses.push_back(resolve_broadcast_path(p, ast.module_name, d.span));
          mod->use_span = d.span;
        } else if (d.kind == DeclKind::BroadcastGroup) {
          GroupInfo g;
          g.path = ast.module_name + "::" + d.name;
          g.span = d.span;
          for (const auto& p : d.paths) g.members.push_back(resolve_broadcast_path(p, ast.module_name, d.span));
          prog_.groups[g.path] = std::move(g);
        }
      }
    }
    // Group membership must be acyclic.
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& g) {
      state[g] = 1;
      for (const auto& m : prog_.groups.at(g).members) {
        if (!prog_.groups.count(m)) continue;
        if (state[m] == 1) throw ResolveError(prog_.groups.at(g).span, "cyclic broadcast group '" + g + "'");
        if (state[m] == 0) visit(m);
      }
      state[g] = 2;
    };
    for (const auto& [g, info] : prog_.groups)
      if (state[g] == 0) visit(g);
  }

  Type resolve_type(const Type& t, const std::string& module, const std::map<std::string, Type>& tparams,
                    const SourceSpan& span) {
    if (t.args.empty()) {
      auto it = tparams.find(t.name);
      if (it != tparams.end()) return it->second;
    }
    if (is_builtin_type(t.name)) {
      if (!t.args.empty()) throw ResolveError(span, "type '" + t.name + "' takes no arguments");
      return Type{t.name, {}};
    }
    auto c = lookup(t.name, module, [](const Decl& d) { return d.kind == DeclKind::SortDecl; });
    if (c.empty()) throw ResolveError(span, "unknown type '" + t.name + "'");
    if (c.size() > 1) throw ResolveError(span, "ambiguous type '" + t.name + "'");
    const Decl& sd = *decls_.at(c[0]).decl;
    if (sd.type_params.size() != t.args.size())
      throw ResolveError(span, "type '" + t.name + "' expects " + std::to_string(sd.type_params.size()) +
                                   " argument(s)");
    Type out{c[0], {}};
    bool ground = true;
    for (const auto& a : t.args) {
      out.args.push_back(resolve_type(a, module, tparams, span));
      if (!is_ground(out.args.back())) ground = false;
    }
    if (ground && !out.args.empty()) observed_sorts_.insert(sort_of(out));
    return out;
  }

  static bool is_ground(const Type& t) {
    if (is_type_var(t)) return false;
    return std::all_of(t.args.begin(), t.args.end(), is_ground);
  }

  // Signature of a declaration with its type parameters as unification variables.
  struct Signature {
    std::vector<Type> params;
    Type ret;
  };

  Signature template_signature(const DeclRef& r) {
    std::map<std::string, Type> tp;
    for (const auto& n : r.decl->type_params) tp[n] = Type{"?" + n, {}};
    Signature s;
    for (const auto& p : r.decl->params) s.params.push_back(resolve_type(p.type, r.ast->module_name, tp, p.span));
    if (r.decl->ret_type) s.ret = resolve_type(*r.decl->ret_type, r.ast->module_name, tp, r.decl->span);
    return s;
  }

  std::size_t instantiate(const std::string& path, const std::vector<Type>& type_args, const SourceSpan& use_span) {
    std::string symbol = mangle(path, type_args);
    auto found = prog_.by_symbol.find(symbol);
    if (found != prog_.by_symbol.end()) return found->second;
    const DeclRef& r = decls_.at(path);
    const Decl& d = *r.decl;
    if (d.type_params.size() != type_args.size()) throw ResolveError(use_span, "cannot infer type arguments");
    std::map<std::string, Type> tp;
    for (std::size_t i = 0; i < type_args.size(); ++i) tp[d.type_params[i]] = type_args[i];

    FnInstance fi;
    fi.kind = d.kind == DeclKind::ProofFn ? FnKind::Proof : d.kind == DeclKind::AxiomFn ? FnKind::Axiom : FnKind::Spec;
    fi.path = path;
    fi.symbol = symbol;
    fi.type_args = type_args;
    fi.module = r.ast->module_name;
    fi.broadcast = d.broadcast;
    fi.is_const = d.kind == DeclKind::ConstDecl;
    fi.span = d.span;
    fi.source_index = r.source_index;
    std::set<std::string> names;
    for (const auto& p : d.params) {
      if (!names.insert(p.name).second) throw ResolveError(p.span, "duplicate parameter '" + p.name + "'");
      Type ty = resolve_type(p.type, fi.module, tp, p.span);
      fi.params.push_back(ParamInfo{p.name, ty, ty.name == "nat"});
    }
    if (d.ret_type) {
      fi.ret = resolve_type(*d.ret_type, fi.module, tp, d.span);
      fi.ret_nat = fi.ret.name == "nat";
    } else {
      fi.ret = Type{"bool", {}};
    }
    std::size_t idx = prog_.functions.size();
    prog_.by_symbol[symbol] = idx;
    prog_.functions.push_back(std::move(fi));
    worklist_.push_back(idx);
    return idx;
  }

  void drain() {
    while (!worklist_.empty()) {
      std::size_t idx = worklist_.front();
      worklist_.pop_front();
      check_body(idx);
    }
  }

  void instantiate_generic_lemmas() {
    std::set<Type> universe = observed_sorts_;
    for (const auto& sp : prog_.sort_paths) {
      const Decl& sd = *decls_.at(sp).decl;
      if (sd.type_params.empty()) continue;
      Type seed{sp, {}};
      for (std::size_t i = 0; i < sd.type_params.size(); ++i) seed.args.push_back(Type{"int", {}});
      universe.insert(seed);
    }
    std::set<Type> cands{Type{"int", {}}};
    for (const auto& u : universe)
      for (const auto& a : u.args) cands.insert(a);
    std::vector<Type> cand_list(cands.begin(), cands.end());

    for (const auto& path : order_) {
      const DeclRef& r = decls_.at(path);
      const Decl& d = *r.decl;
      if ((d.kind != DeclKind::ProofFn && d.kind != DeclKind::AxiomFn) || d.type_params.empty()) continue;
      Signature sig = template_signature(r);
      std::size_t k = d.type_params.size();
      std::vector<std::size_t> choice(k, 0);
      for (;;) {
        std::map<std::string, Type> subst;
        std::vector<Type> args;
        for (std::size_t i = 0; i < k; ++i) {
          subst["?" + d.type_params[i]] = cand_list[choice[i]];
          args.push_back(cand_list[choice[i]]);
        }
        bool ok = true;
        for (const auto& p : sig.params) {
          Type t = sort_of(substitute(p, subst));
          if (!is_builtin_type(t.name) && !t.args.empty() && !universe.count(t)) ok = false;
        }
        if (ok) instantiate(path, args, d.span);
        std::size_t i = 0;
        while (i < k && ++choice[i] == cand_list.size()) choice[i++] = 0;
        if (i == k) break;
      }
    }
  }

  // ---- type checking ----

  struct Scope {
    std::vector<std::map<std::string, Type>> frames;
    std::set<std::string> all_names;

    const Type* find(const std::string& n) const {
      for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
        auto f = it->find(n);
        if (f != it->end()) return &f->second;
      }
      return nullptr;
    }
  };

  struct Ctx {
    std::string module;
    std::map<std::string, Type> tparams;
    Scope scope;
  };

  [[noreturn]] static void type_error(const Expr& e, const std::string& msg) { throw ResolveError(e.span, msg); }

  void expect_type(const Expr& e, const Type& want) {
    if (!same_sort(e.type, want))
      type_error(e, "type mismatch: expected " + want.to_string() + ", found " + e.type.to_string());
  }

  Expr check_expr(const Expr& in, Ctx& ctx) {
    Expr e = in;
    switch (e.kind) {
      case ExprKind::IntLit:
        e.type = Type{"int", {}};
        return e;
      case ExprKind::BoolLit:
        e.type = Type{"bool", {}};
        return e;
      case ExprKind::Var: {
        if (const Type* t = ctx.scope.find(e.name)) {
          e.type = *t;
          return e;
        }
        auto c = lookup(e.name, ctx.module, [](const Decl& d) { return d.kind == DeclKind::ConstDecl; });
        if (c.size() == 1) {
          std::size_t idx = instantiate(c[0], {}, e.span);
          Expr call = Expr::call(e.name, {});
          call.span = e.span;
          call.trigger_mark = e.trigger_mark;
          call.symbol = prog_.functions[idx].symbol;
          call.type = prog_.functions[idx].ret;
          return call;
        }
        type_error(e, "unbound variable '" + e.name + "'");
      }
      case ExprKind::Call:
        return check_call(e, ctx);
      case ExprKind::Binary: {
        e.args[0] = check_expr(e.args[0], ctx);
        e.args[1] = check_expr(e.args[1], ctx);
        const Type intt{"int", {}}, boolt{"bool", {}};
        if (is_arithmetic(e.op)) {
          expect_type(e.args[0], intt);
          expect_type(e.args[1], intt);
          e.type = intt;
        } else if (e.op == BinaryOp::Eq || e.op == BinaryOp::Ne) {
          if (!same_sort(e.args[0].type, e.args[1].type))
            type_error(e, "cannot compare " + e.args[0].type.to_string() + " with " + e.args[1].type.to_string());
          e.type = boolt;
        } else if (is_comparison(e.op)) {
          expect_type(e.args[0], intt);
          expect_type(e.args[1], intt);
          e.type = boolt;
        } else {
          expect_type(e.args[0], boolt);
          expect_type(e.args[1], boolt);
          e.type = boolt;
        }
        return e;
      }
      case ExprKind::Unary:
        e.args[0] = check_expr(e.args[0], ctx);
        if (e.uop == UnaryOp::Not) {
          expect_type(e.args[0], Type{"bool", {}});
          e.type = Type{"bool", {}};
        } else {
          expect_type(e.args[0], Type{"int", {}});
          e.type = Type{"int", {}};
        }
        return e;
      case ExprKind::Ite:
        for (auto& a : e.args) a = check_expr(a, ctx);
        expect_type(e.args[0], Type{"bool", {}});
        if (!same_sort(e.args[1].type, e.args[2].type)) type_error(e, "if branches have different types");
        e.type = sort_of(e.args[1].type);
        return e;
      case ExprKind::Forall:
      case ExprKind::Exists: {
        std::map<std::string, Type> frame;
        for (auto& b : e.binders) {
          b.type = resolve_type(b.type, ctx.module, ctx.tparams, b.span);
          if (ctx.scope.find(b.name)) throw ResolveError(b.span, "binder '" + b.name + "' shadows a variable");
          if (!frame.emplace(b.name, b.type).second) throw ResolveError(b.span, "duplicate binder '" + b.name + "'");
        }
        ctx.scope.frames.push_back(frame);
        e.args[0] = check_expr(e.args[0], ctx);
        ctx.scope.frames.pop_back();
        expect_type(e.args[0], Type{"bool", {}});
        e.type = Type{"bool", {}};
        return e;
      }
    }
    return e;
  }

  Expr check_call(Expr e, Ctx& ctx) {
    for (auto& a : e.args) a = check_expr(a, ctx);
    auto cands = lookup(e.name, ctx.module, [](const Decl& d) {
      return d.kind == DeclKind::SpecFn || d.kind == DeclKind::ConstDecl;
    });
    if (cands.empty()) {
      auto lemma = lookup(e.name, ctx.module, [](const Decl& d) {
        return d.kind == DeclKind::ProofFn || d.kind == DeclKind::AxiomFn;
      });
      if (!lemma.empty()) type_error(e, "proof function '" + e.name + "' cannot be used in an expression");
      type_error(e, "unresolved function '" + e.name + "'");
    }
    struct Match {
      std::string path;
      std::map<std::string, Type> bindings;
      Type ret;
    };
    std::vector<Match> matches;
    std::string arity_msg;
    for (const auto& c : cands) {
      const DeclRef& r = decls_.at(c);
      Signature sig = template_signature(r);
      if (sig.params.size() != e.args.size()) {
        arity_msg = "'" + e.name + "' expects " + std::to_string(sig.params.size()) + " argument(s), got " +
                    std::to_string(e.args.size());
        continue;
      }
      Match m{c, {}, {}};
      bool ok = true;
      for (std::size_t i = 0; i < sig.params.size() && ok; ++i) ok = unify(sig.params[i], e.args[i].type, m.bindings);
      if (!ok) continue;
      m.ret = substitute(sig.ret, m.bindings);
      matches.push_back(std::move(m));
    }
    if (matches.empty()) {
      if (!arity_msg.empty() && cands.size() == 1) type_error(e, "arity mismatch: " + arity_msg);
      std::string types;
      for (std::size_t i = 0; i < e.args.size(); ++i) types += (i ? ", " : "") + e.args[i].type.to_string();
      type_error(e, "no function '" + e.name + "' accepts argument types (" + types + ")");
    }
    const Match* chosen = &matches[0];
    if (matches.size() > 1) {
      const Match* exact = nullptr;
      for (const auto& m : matches)
        if (m.path == e.name || m.path == ctx.module + "::" + e.name) exact = &m;
      if (!exact) type_error(e, "ambiguous call to '" + e.name + "'");
      chosen = exact;
    }
    const DeclRef& r = decls_.at(chosen->path);
    std::vector<Type> targs;
    for (const auto& tp : r.decl->type_params) {
      auto it = chosen->bindings.find("?" + tp);
      if (it == chosen->bindings.end()) type_error(e, "cannot infer type argument '" + tp + "' of '" + e.name + "'");
      targs.push_back(it->second);
    }
    if (is_type_var(chosen->ret) || !is_ground(chosen->ret)) type_error(e, "cannot infer result type");
    std::size_t idx = instantiate(chosen->path, targs, e.span);
    e.symbol = prog_.functions[idx].symbol;
    e.type = prog_.functions[idx].ret;
    return e;
  }

  std::string resolve_lemma(Expr& call, Ctx& ctx) {
    for (auto& a : call.args) a = check_expr(a, ctx);
    auto cands = lookup(call.name, ctx.module, [](const Decl& d) {
      return d.kind == DeclKind::ProofFn || d.kind == DeclKind::AxiomFn;
    });
    if (cands.empty()) throw ResolveError(call.span, "unresolved lemma '" + call.name + "'");
    if (cands.size() > 1) throw ResolveError(call.span, "ambiguous lemma '" + call.name + "'");
    const DeclRef& r = decls_.at(cands[0]);
    Signature sig = template_signature(r);
    if (sig.params.size() != call.args.size())
      throw ResolveError(call.span, "arity mismatch: '" + call.name + "' expects " +
                                        std::to_string(sig.params.size()) + " argument(s), got " +
                                        std::to_string(call.args.size()));
    std::map<std::string, Type> b;
    for (std::size_t i = 0; i < sig.params.size(); ++i)
      if (!unify(sig.params[i], call.args[i].type, b))
        throw ResolveError(call.args[i].span, "type mismatch in argument " + std::to_string(i + 1) + " of '" +
                                                  call.name + "'");
    std::vector<Type> targs;
    for (const auto& tp : r.decl->type_params) {
      auto it = b.find("?" + tp);
      if (it == b.end()) throw ResolveError(call.span, "cannot infer type argument '" + tp + "'");
      targs.push_back(it->second);
    }
    std::size_t idx = instantiate(cands[0], targs, call.span);
    call.symbol = prog_.functions[idx].symbol;
    call.type = Type{"bool", {}};
    return call.symbol;
  }

  void declare(Ctx& ctx, const std::string& name, const Type& t, const SourceSpan& span) {
    if (ctx.scope.find(name) || !ctx.scope.all_names.insert(name).second) throw ResolveError(span, "'" + name + "' is already bound");
    ctx.scope.frames.back()[name] = t;
  }

  void check_stmts(std::vector<Stmt>& stmts, Ctx& ctx) {
    for (auto& s : stmts) {
      switch (s.kind) {
        case StmtKind::Assert:
          s.expr = check_expr(s.expr, ctx);
          expect_type(s.expr, Type{"bool", {}});
          break;
        case StmtKind::AssertBy: {
          s.expr = check_expr(s.expr, ctx);
          expect_type(s.expr, Type{"bool", {}});
          ctx.scope.frames.emplace_back();
          // `assert forall|x| ... by { }` proves the body for an arbitrary x.
          if (s.expr.kind == ExprKind::Forall)
            for (const auto& b : s.expr.binders) declare(ctx, b.name, b.type, b.span);
          check_stmts(s.body, ctx);
          ctx.scope.frames.pop_back();
          break;
        }
        case StmtKind::Let: {
          s.expr = check_expr(s.expr, ctx);
          Type t = s.expr.type;
          if (s.let_type) {
            Type want = resolve_type(*s.let_type, ctx.module, ctx.tparams, s.span);
            expect_type(s.expr, want);
            t = want;
          }
          declare(ctx, s.let_name, t, s.span);
          break;
        }
        case StmtKind::LemmaCall:
          resolve_lemma(s.expr, ctx);
          break;
        case StmtKind::BroadcastUse:
          for (auto& p : s.paths) p = resolve_broadcast_path(p, ctx.module, s.span);
          break;
      }
    }
  }

  void check_body(std::size_t idx) {
    // Copy out what we need: instantiate() may grow prog_.functions.
    FnInstance fi = prog_.functions[idx];
    const DeclRef& r = decls_.at(fi.path);
    const Decl& d = *r.decl;
    Ctx ctx;
    ctx.module = fi.module;
    for (std::size_t i = 0; i < d.type_params.size(); ++i) ctx.tparams[d.type_params[i]] = fi.type_args[i];
    ctx.scope.frames.emplace_back();
    for (const auto& p : fi.params) {
      ctx.scope.frames.back()[p.name] = p.type;
      ctx.scope.all_names.insert(p.name);
    }
    if (d.kind == DeclKind::SpecFn && d.spec_body) {
      Expr body = check_expr(*d.spec_body, ctx);
      if (!same_sort(body.type, fi.ret))
        throw ResolveError(body.span, "body of '" + fi.path + "' has type " + body.type.to_string() +
                                          ", expected " + fi.ret.to_string());
      fi.body = std::move(body);
    }
    for (const auto& rq : d.requires_) {
      Expr c = check_expr(rq, ctx);
      expect_type(c, Type{"bool", {}});
      fi.requires_.push_back(std::move(c));
    }
    for (const auto& en : d.ensures) {
      Expr c = check_expr(en, ctx);
      expect_type(c, Type{"bool", {}});
      fi.ensures.push_back(std::move(c));
    }
    if (d.kind == DeclKind::ProofFn) {
      fi.stmts = d.body;
      check_stmts(fi.stmts, ctx);
    }
    prog_.functions[idx] = std::move(fi);
  }

  static void collect_calls(const std::vector<Stmt>& stmts, std::vector<std::string>& out) {
    for (const auto& s : stmts) {
      if (s.kind == StmtKind::LemmaCall) out.push_back(s.expr.symbol);
      if (s.kind == StmtKind::AssertBy) collect_calls(s.body, out);
    }
  }

  void check_lemma_recursion() {
    std::size_t n = prog_.functions.size();
    std::vector<std::vector<std::size_t>> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> calls;
      collect_calls(prog_.functions[i].stmts, calls);
      for (const auto& c : calls) g[i].push_back(prog_.by_symbol.at(c));
    }
    for (const auto& scc : strongly_connected_components(g)) {
      bool cyclic = scc.size() > 1;
      if (scc.size() == 1)
        for (auto s : g[scc[0]])
          if (s == scc[0]) cyclic = true;
      if (cyclic) {
        const FnInstance& f = prog_.functions[scc[0]];
        throw ResolveError(f.span, "recursive proof function '" + f.path + "' is not supported");
      }
    }
  }
};

void collect_block_uses(const std::vector<Stmt>& stmts, std::vector<std::string>& out) {
  for (const auto& s : stmts) {
    if (s.kind == StmtKind::BroadcastUse) out.insert(out.end(), s.paths.begin(), s.paths.end());
    if (s.kind == StmtKind::AssertBy) collect_block_uses(s.body, out);
  }
}

}  // namespace

Program resolve_program(const std::vector<ProgramAst>& asts) {
  Resolver r(asts);
  return r.run();
}

std::vector<std::vector<std::size_t>> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& graph) {
  const std::size_t n = graph.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;

  // Iterative DFS to keep deep dependency chains off the call stack.
  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> dfs{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!dfs.empty()) {
      Frame& f = dfs.back();
      if (f.next_edge < graph[f.v].size()) {
        std::size_t w = graph[f.v][f.next_edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          dfs.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      dfs.pop_back();
      if (!dfs.empty()) low[dfs.back().v] = std::min(low[dfs.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

// ---- broadcast registry ----

BroadcastRegistry build_registry(const Program& program) {
  BroadcastRegistry reg;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    const FnInstance& f = program.functions[i];
    if (!f.broadcast || f.kind == FnKind::Spec) continue;
    FactEntry e;
    e.id = static_cast<int>(reg.facts.size());
    e.path = f.path;
    e.symbol = f.symbol;
    e.fn_index = i;
    e.axiom = f.kind == FnKind::Axiom;
    reg.facts_by_path[f.path].push_back(e.id);
    reg.facts.push_back(std::move(e));
  }
  for (const auto& [path, info] : program.groups) {
    std::set<int> ids;
    for (const auto& imp : reg.expand(program, path)) ids.insert(imp.fact);
    reg.groups[path] = std::move(ids);
  }
  if (program.groups.count(kDefaultGroupPath)) {
    reg.default_group_path = kDefaultGroupPath;
    reg.default_group = reg.groups.at(kDefaultGroupPath);
  }
  return reg;
}

std::vector<ImportedFact> BroadcastRegistry::expand(const Program& program, const std::string& path) const {
  std::vector<ImportedFact> out;
  std::function<void(const std::string&, std::vector<std::string>&)> walk = [&](const std::string& p,
                                                                               std::vector<std::string>& chain) {
    auto g = program.groups.find(p);
    if (g != program.groups.end()) {
      chain.push_back(p);
      for (const auto& m : g->second.members) walk(m, chain);
      chain.pop_back();
      return;
    }
    auto f = facts_by_path.find(p);
    if (f == facts_by_path.end()) return;
    for (int id : f->second) out.push_back(ImportedFact{id, chain});
  };
  std::vector<std::string> chain;
  walk(path, chain);
  return out;
}

std::set<int> BroadcastRegistry::flatten(const Program& program, const std::vector<std::string>& paths) const {
  std::set<int> out;
  for (const auto& p : paths)
    for (const auto& imp : expand(program, p)) out.insert(imp.fact);
  return out;
}

std::set<int> imported_fact_ids(const Program& program, const BroadcastRegistry& registry, const FnInstance& fn,
                                bool include_default) {
  std::set<int> out;
  if (include_default) out = registry.default_group;
  std::vector<std::string> paths;
  if (const ModuleInfo* m = program.module(fn.module)) paths = m->uses;
  collect_block_uses(fn.stmts, paths);
  for (const auto& p : paths)
    for (const auto& imp : registry.expand(program, p)) out.insert(imp.fact);
  return out;
}

std::optional<std::size_t> TaskOrder::task_of(const std::string& symbol) const {
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].symbol == symbol) return i;
  return std::nullopt;
}

TaskOrder order_tasks(const Program& program, const BroadcastRegistry& registry) {
  // One task per proof fn instance; axioms are trusted and have none.
  std::vector<std::size_t> fns;
  std::map<std::size_t, std::size_t> node_of_fn;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (program.functions[i].kind != FnKind::Proof) continue;
    node_of_fn[i] = fns.size();
    fns.push_back(i);
  }
  const std::size_t n = fns.size();
  std::vector<std::set<int>> imports(n);
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t t = 0; t < n; ++t) {
    imports[t] = imported_fact_ids(program, registry, program.functions[fns[t]]);
    for (int f : imports[t]) {
      auto it = node_of_fn.find(registry.facts[f].fn_index);
      if (it != node_of_fn.end()) deps[t].push_back(it->second);
    }
    std::sort(deps[t].begin(), deps[t].end());
    deps[t].erase(std::unique(deps[t].begin(), deps[t].end()), deps[t].end());
  }
  for (const auto& scc : strongly_connected_components(deps)) {
    bool cyclic = scc.size() > 1;
    if (scc.size() == 1 && std::find(deps[scc[0]].begin(), deps[scc[0]].end(), scc[0]) != deps[scc[0]].end())
      cyclic = true;
    if (cyclic) {
      std::vector<std::string> names;
      for (auto v : scc) names.push_back(program.functions[fns[v]].symbol);
      std::sort(names.begin(), names.end());
      throw CycleError(names);
    }
  }
  // Kahn's algorithm; ties resolved by declaration order.
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> users(n);
  for (std::size_t t = 0; t < n; ++t) {
    indegree[t] = deps[t].size();
    for (auto d : deps[t]) users[d].push_back(t);
  }
  auto key = [&](std::size_t t) { return std::make_pair(program.functions[fns[t]].source_index, fns[t]); };
  auto cmp = [&](std::size_t a, std::size_t b) { return key(a) > key(b); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
  for (std::size_t t = 0; t < n; ++t)
    if (indegree[t] == 0) ready.push(t);
  std::vector<std::size_t> position(n, 0);
  std::vector<int> layer(n, 0);
  TaskOrder order;
  while (!ready.empty()) {
    std::size_t t = ready.top();
    ready.pop();
    for (auto d : deps[t]) layer[t] = std::max(layer[t], layer[d] + 1);
    position[t] = order.tasks.size();
    Task task;
    task.fn_index = fns[t];
    task.symbol = program.functions[fns[t]].symbol;
    task.layer = layer[t];
    task.imported_facts = imports[t];
    for (auto d : deps[t]) task.depends_on.push_back(position[d]);
    order.layer_count = std::max(order.layer_count, layer[t] + 1);
    order.tasks.push_back(std::move(task));
    for (auto u : users[t])
      if (--indegree[u] == 0) ready.push(u);
  }
  for (const auto& f : registry.facts) {
    auto it = node_of_fn.find(f.fn_index);
    if (it != node_of_fn.end()) order.fact_task[f.id] = position[it->second];
  }
  return order;
}

}  // namespace tunav
