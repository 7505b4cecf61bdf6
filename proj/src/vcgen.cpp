#include "tunav/vcgen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <functional>
#include <sstream>

#include "tunav/prelude.hpp"

namespace tunav {

namespace {

const Type kInt{"int", {}};
const Type kBool{"bool", {}};

Expr typed(Expr e, Type t) {
  e.type = std::move(t);
  return e;
}

Expr mk_bool(bool v) { return typed(Expr::bool_lit(v), kBool); }

Expr mk_var(const std::string& name, const Type& t) { return typed(Expr::var(name, t), t); }

Expr mk_bin(BinaryOp op, Expr a, Expr b) {
  Type t = is_arithmetic(op) ? kInt : kBool;
  return typed(Expr::binary(op, std::move(a), std::move(b)), t);
}

Expr mk_nonneg(Expr e) { return mk_bin(BinaryOp::Ge, std::move(e), typed(Expr::int_lit(0), kInt)); }

Expr mk_and(const std::vector<Expr>& es) {
  if (es.empty()) return mk_bool(true);
  Expr out = es[0];
  for (std::size_t i = 1; i < es.size(); ++i) out = mk_bin(BinaryOp::And, out, es[i]);
  return out;
}

bool is_true(const Expr& e) { return e.kind == ExprKind::BoolLit && e.bool_value; }

// Equation, or equivalence for booleans.
Expr mk_defeq(Expr lhs, Expr rhs) {
  BinaryOp op = lhs.type.is_bool() ? BinaryOp::Iff : BinaryOp::Eq;
  return mk_bin(op, std::move(lhs), std::move(rhs));
}

bool has_marks(const Expr& e) {
  if (e.trigger_mark) return true;
  if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) return false;
  for (const auto& a : e.args)
    if (has_marks(a)) return true;
  return false;
}

void free_vars(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var && !bound.count(e.name)) out.insert(e.name);
  if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) {
    std::vector<std::string> added;
    for (const auto& b : e.binders)
      if (bound.insert(b.name).second) added.push_back(b.name);
    free_vars(e.args[0], bound, out);
    for (const auto& n : added) bound.erase(n);
    return;
  }
  for (const auto& a : e.args) free_vars(a, bound, out);
}

std::atomic<int> g_fresh{0};

std::string strip_layer(const std::string& symbol) {
  auto pos = symbol.find('#');
  return pos == std::string::npos ? symbol : symbol.substr(0, pos);
}

Expr rename_calls(const Expr& e, const std::set<std::string>& group, const std::string& suffix) {
  Expr out = e;
  if (out.kind == ExprKind::Call && group.count(out.symbol)) out.symbol += suffix;
  for (auto& a : out.args) a = rename_calls(a, group, suffix);
  return out;
}

Expr head_call(const FnInstance& fn, const std::string& symbol, const std::vector<Binder>& binders) {
  std::vector<Expr> args;
  for (const auto& b : binders) args.push_back(mk_var(b.name, b.type));
  Expr call = Expr::call(fn.path, std::move(args));
  call.symbol = symbol;
  call.type = sort_of(fn.ret);
  call.span = fn.span;
  return call;
}

std::vector<Binder> param_binders(const FnInstance& fn, std::vector<Expr>* nat_guards) {
  std::vector<Binder> out;
  for (const auto& p : fn.params) {
    out.push_back(Binder{p.name, sort_of(p.type), fn.span});
    if (p.is_nat && nat_guards) nat_guards->push_back(mk_nonneg(mk_var(p.name, kInt)));
  }
  return out;
}

void annotate_fact(QuantifiedFact& f, TriggerStrategy strategy) {
  annotate_triggers(f.hypothesis, strategy, false, &f.warnings);
  annotate_triggers(f.conclusion, strategy, true, &f.warnings);
}

}  // namespace

std::string Origin::label() const {
  switch (kind) {
    case OriginKind::Axiom: return "axiom " + symbol;
    case OriginKind::BroadcastLemma: return "lemma " + symbol;
    case OriginKind::DefinitionalAxiom: return "definition " + symbol;
    case OriginKind::LocalHypothesis:
      return "local " + span.file + ":" + std::to_string(span.start_offset) + (path.empty() ? "" : " " + path);
  }
  return "";
}

Expr QuantifiedFact::formula() const {
  Expr body = is_true(hypothesis) ? conclusion : mk_bin(BinaryOp::Implies, hypothesis, conclusion);
  if (binders.empty()) return body;
  Expr q = typed(Expr::quant(ExprKind::Forall, binders, body), kBool);
  q.triggers = triggers;
  return q;
}

std::string Obligation::describe() const {
  switch (site.kind) {
    case SiteKind::Assert: return "assertion at " + site.span.to_string();
    case SiteKind::Ensures:
      return "postcondition " + std::to_string(site.index + 1) + " of " + function_path + " at " +
             site.span.to_string();
    case SiteKind::LemmaPrecondition:
      return "precondition " + std::to_string(site.index + 1) + " of call at " + site.span.to_string();
  }
  return "";
}

void collect_called_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Call && !e.symbol.empty()) out.insert(e.symbol);
  for (const auto& a : e.args) collect_called_symbols(a, out);
  for (const auto& g : e.triggers)
    for (const auto& t : g) collect_called_symbols(t, out);
}

Expr substitute_vars(const Expr& e, const std::map<std::string, Expr>& subst) {
  if (subst.empty()) return e;
  if (e.kind == ExprKind::Var) {
    auto it = subst.find(e.name);
    if (it == subst.end()) return e;
    Expr r = it->second;
    r.trigger_mark = e.trigger_mark || r.trigger_mark;
    return r;
  }
  if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) {
    std::map<std::string, Expr> inner = subst;
    for (const auto& b : e.binders) inner.erase(b.name);
    std::set<std::string> incoming;
    for (const auto& [k, v] : inner) {
      std::set<std::string> bound;
      free_vars(v, bound, incoming);
    }
    Expr out = e;
    for (auto& b : out.binders) {
      if (!incoming.count(b.name)) continue;
      std::string fresh = b.name + "%" + std::to_string(g_fresh++);
      inner[b.name] = mk_var(fresh, b.type);
      b.name = fresh;
    }
    out.args[0] = substitute_vars(e.args[0], inner);
    for (auto& g : out.triggers)
      for (auto& t : g) t = substitute_vars(t, inner);
    return out;
  }
  Expr out = e;
  for (auto& a : out.args) a = substitute_vars(a, subst);
  return out;
}

Expr lower_nat_binders(const Expr& e) {
  Expr out = e;
  for (auto& a : out.args) a = lower_nat_binders(a);
  if (out.kind != ExprKind::Forall && out.kind != ExprKind::Exists) return out;
  std::vector<Expr> guards;
  for (auto& b : out.binders) {
    if (b.type.name == "nat") guards.push_back(mk_nonneg(mk_var(b.name, kInt)));
    b.type = sort_of(b.type);
  }
  if (guards.empty()) return out;
  BinaryOp op = out.kind == ExprKind::Forall ? BinaryOp::Implies : BinaryOp::And;
  out.args[0] = mk_bin(op, mk_and(guards), out.args[0]);
  return out;
}

QuantifiedFact lower_quantified_fact(const FnInstance& fn, TriggerStrategy strategy) {
  QuantifiedFact f;
  f.origin.kind = fn.kind == FnKind::Axiom ? OriginKind::Axiom : OriginKind::BroadcastLemma;
  f.origin.path = fn.path;
  f.origin.symbol = fn.symbol;
  f.origin.span = fn.span;
  std::vector<Expr> hyps;
  f.binders = param_binders(fn, &hyps);
  for (const auto& r : fn.requires_) hyps.push_back(lower_nat_binders(r));
  std::vector<Expr> concl;
  for (const auto& en : fn.ensures) concl.push_back(lower_nat_binders(en));
  f.hypothesis = mk_and(hyps);
  f.conclusion = mk_and(concl);
  if (!f.binders.empty()) {
    Expr whole = is_true(f.hypothesis) ? f.conclusion : mk_bin(BinaryOp::Implies, f.hypothesis, f.conclusion);
    TriggerSelection sel;
    if (has_marks(f.hypothesis) || has_marks(f.conclusion)) {
      sel = infer_triggers(f.binders, whole, strategy, false, fn.span);
    } else {
      try {
        sel = infer_triggers(f.binders, f.conclusion, strategy, false, fn.span);
      } catch (const TriggerError&) {
        sel = infer_triggers(f.binders, whole, strategy, false, fn.span);
      }
    }
    for (auto& g : sel.groups) f.triggers.push_back(std::move(g.exprs));
    f.trigger_source = sel.strategy_used;
    for (auto& w : sel.warnings) f.warnings.push_back(fn.path + ": " + w);
  }
  annotate_fact(f, strategy);
  return f;
}

std::vector<QuantifiedFact> definitional_axiom(const FnInstance& fn, int fuel,
                                               const std::set<std::string>& recursive_group) {
  std::vector<QuantifiedFact> out;
  auto base = [&](const std::string& head_symbol) {
    QuantifiedFact f;
    f.origin.kind = OriginKind::DefinitionalAxiom;
    f.origin.path = fn.path;
    f.origin.symbol = fn.symbol;
    f.origin.span = fn.span;
    f.binders = param_binders(fn, nullptr);
    f.hypothesis = mk_bool(true);
    if (!f.binders.empty()) f.triggers.push_back({head_call(fn, head_symbol, f.binders)});
    f.trigger_source = TriggerSource::Manual;
    return f;
  };
  if (!fn.body) {
    // Uninterpreted `nat` results are non-negative on `nat` arguments.
    if (fn.ret_nat) {
      QuantifiedFact f = base(fn.symbol);
      std::vector<Expr> guards;
      param_binders(fn, &guards);
      f.hypothesis = mk_and(guards);
      f.conclusion = mk_nonneg(head_call(fn, fn.symbol, f.binders));
      out.push_back(std::move(f));
    }
    return out;
  }
  if (fuel <= 0) return out;
  Expr body = lower_nat_binders(*fn.body);
  if (recursive_group.empty()) {
    QuantifiedFact f = base(fn.symbol);
    f.conclusion = mk_defeq(head_call(fn, fn.symbol, f.binders), body);
    annotate_triggers(f.conclusion, TriggerStrategy::Conservative, true);
    out.push_back(std::move(f));
    return out;
  }
  // Layer `fuel` is the plain symbol; layer k unfolds into layer k-1; layer 0
  // stays uninterpreted. Each layer also equals the one below it, so a term
  // the user writes meets the lower-layer term produced by an unfolding.
  auto layer = [&](int k) { return k == fuel ? fn.symbol : fn.symbol + "#" + std::to_string(k); };
  for (int k = fuel; k >= 1; --k) {
    QuantifiedFact f = base(layer(k));
    Expr unfolded = rename_calls(body, recursive_group, "#" + std::to_string(k - 1));
    f.conclusion = mk_defeq(head_call(fn, layer(k), f.binders), unfolded);
    annotate_triggers(f.conclusion, TriggerStrategy::Conservative, true);
    bool nullary = f.binders.empty();
    out.push_back(std::move(f));
    if (nullary) continue;
    QuantifiedFact link = base(layer(k));
    link.conclusion = mk_defeq(head_call(fn, layer(k), link.binders), head_call(fn, layer(k - 1), link.binders));
    out.push_back(std::move(link));
  }
  return out;
}

// ---- generator ----

VcGenerator::VcGenerator(const Program& program, const BroadcastRegistry& registry, VcConfig config)
    : program_(program), registry_(registry), config_(std::move(config)) {}

FactPtr VcGenerator::broadcast_fact(int id) {
  auto it = broadcast_cache_.find(id);
  if (it != broadcast_cache_.end()) return it->second;
  const FactEntry& entry = registry_.facts.at(id);
  QuantifiedFact f = lower_quantified_fact(program_.functions.at(entry.fn_index), config_.strategy);
  f.origin.fact_id = id;
  for (const auto& w : f.warnings) warnings.push_back(w);
  auto ptr = std::make_shared<const QuantifiedFact>(std::move(f));
  broadcast_cache_[id] = ptr;
  return ptr;
}

void VcGenerator::compute_recursion() {
  if (scc_ready_) return;
  scc_ready_ = true;
  std::vector<std::size_t> specs;
  std::map<std::string, std::size_t> node;
  for (std::size_t i = 0; i < program_.functions.size(); ++i) {
    const FnInstance& f = program_.functions[i];
    if (f.kind != FnKind::Spec || !f.body) continue;
    node[f.symbol] = specs.size();
    specs.push_back(i);
  }
  std::vector<std::vector<std::size_t>> g(specs.size());
  for (std::size_t v = 0; v < specs.size(); ++v) {
    std::set<std::string> called;
    collect_called_symbols(*program_.functions[specs[v]].body, called);
    for (const auto& c : called) {
      auto it = node.find(c);
      if (it != node.end()) g[v].push_back(it->second);
    }
  }
  for (const auto& scc : strongly_connected_components(g)) {
    bool rec = scc.size() > 1;
    if (scc.size() == 1)
      for (auto w : g[scc[0]])
        if (w == scc[0]) rec = true;
    if (!rec) continue;
    std::set<std::string> members;
    for (auto v : scc) members.insert(program_.functions[specs[v]].symbol);
    for (const auto& m : members) recursive_scc_[m] = members;
  }
}

const std::vector<FactPtr>& VcGenerator::definitional_facts(const std::string& symbol) {
  auto it = definitional_cache_.find(symbol);
  if (it != definitional_cache_.end()) return it->second;
  compute_recursion();
  std::vector<FactPtr> facts;
  auto fit = program_.by_symbol.find(symbol);
  if (fit != program_.by_symbol.end()) {
    const FnInstance& fn = program_.functions[fit->second];
    if (fn.kind == FnKind::Spec) {
      auto rit = recursive_scc_.find(symbol);
      static const std::set<std::string> kNone;
      for (auto& f : definitional_axiom(fn, config_.fuel, rit == recursive_scc_.end() ? kNone : rit->second))
        facts.push_back(std::make_shared<const QuantifiedFact>(std::move(f)));
    }
  }
  return definitional_cache_[symbol] = std::move(facts);
}

namespace {

struct Import {
  int id;
  std::set<std::string> via;
};

// Builds obligations for one proof fn.
class FunctionVc {
 public:
  FunctionVc(VcGenerator& gen, const FnInstance& fn) : gen_(gen), fn_(fn) {}

  std::vector<Obligation> run() {
    State top;
    top.chain.push_back("module " + fn_.module);
    std::vector<std::string> module_paths;
    const auto& reg = gen_.registry();
    if (gen_.config().default_prelude && !reg.default_group_path.empty())
      module_paths.push_back(reg.default_group_path);
    if (const ModuleInfo* m = gen_.program().module(fn_.module))
      module_paths.insert(module_paths.end(), m->uses.begin(), m->uses.end());
    if (!is_prelude_module(fn_.module))
      module_paths.insert(module_paths.end(), gen_.config().ambient_uses.begin(), gen_.config().ambient_uses.end());
    add_imports(top, module_paths);
    top.chain.push_back("fn " + fn_.path);
    add_imports(top, direct_uses(fn_.stmts));

    for (const auto& p : fn_.params)
      if (p.is_nat) add_ground(top, mk_nonneg(mk_var(p.name, kInt)), local(fn_.span, "nat " + p.name));
    for (const auto& r : fn_.requires_) add_ground(top, r, local(r.span, "requires"));

    // Spec fns reachable from the function's own expressions.
    for (const auto& r : fn_.requires_) collect_called_symbols(r, fn_symbols_);
    for (const auto& e : fn_.ensures) collect_called_symbols(e, fn_symbols_);
    collect_stmt_symbols(fn_.stmts);

    process(fn_.stmts, top);
    for (std::size_t i = 0; i < fn_.ensures.size(); ++i)
      emit(fn_.ensures[i], top, ObligationSite{SiteKind::Ensures, fn_.ensures[i].span, i});
    return std::move(out_);
  }

 private:
  struct State {
    std::vector<Import> imports;
    std::vector<GroundFact> ground;
    std::vector<std::string> chain;
  };

  VcGenerator& gen_;
  const FnInstance& fn_;
  std::vector<Obligation> out_;
  std::set<std::string> fn_symbols_;
  std::map<std::pair<int, std::set<std::string>>, FactPtr> fact_cache_;

  static Origin local(const SourceSpan& span, const std::string& what) {
    Origin o;
    o.kind = OriginKind::LocalHypothesis;
    o.span = span;
    o.path = what;
    return o;
  }

  static std::vector<std::string> direct_uses(const std::vector<Stmt>& stmts) {
    std::vector<std::string> out;
    for (const auto& s : stmts)
      if (s.kind == StmtKind::BroadcastUse) out.insert(out.end(), s.paths.begin(), s.paths.end());
    return out;
  }

  void add_imports(State& st, const std::vector<std::string>& paths) {
    for (const auto& p : paths) {
      for (const auto& imp : gen_.registry().expand(gen_.program(), p)) {
        auto it = std::find_if(st.imports.begin(), st.imports.end(), [&](const Import& i) { return i.id == imp.fact; });
        if (it == st.imports.end()) {
          st.imports.push_back(Import{imp.fact, {}});
          it = st.imports.end() - 1;
        }
        it->via.insert(imp.groups_via.begin(), imp.groups_via.end());
      }
    }
  }

  void add_ground(State& st, const Expr& e, Origin origin) {
    Expr x = lower_nat_binders(e);
    annotate_triggers(x, gen_.config().strategy, true);
    st.ground.push_back(GroundFact{std::move(x), std::move(origin)});
  }

  void collect_stmt_symbols(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) {
      collect_called_symbols(s.expr, fn_symbols_);
      if (s.kind == StmtKind::LemmaCall) {
        const FnInstance& callee = gen_.program().fn(s.expr.symbol);
        for (const auto& r : callee.requires_) collect_called_symbols(r, fn_symbols_);
        for (const auto& e : callee.ensures) collect_called_symbols(e, fn_symbols_);
      }
      collect_stmt_symbols(s.body);
    }
  }

  FactPtr imported_fact(const Import& imp) {
    auto key = std::make_pair(imp.id, imp.via);
    auto it = fact_cache_.find(key);
    if (it != fact_cache_.end()) return it->second;
    FactPtr base = gen_.broadcast_fact(imp.id);
    if (imp.via.empty()) return fact_cache_[key] = base;
    auto copy = std::make_shared<QuantifiedFact>(*base);
    copy->groups_via.assign(imp.via.begin(), imp.via.end());
    return fact_cache_[key] = copy;
  }

  FactContext context(const State& st) {
    FactContext ctx;
    ctx.scope_chain = st.chain;
    ctx.ground = st.ground;
    std::set<std::string> symbols = fn_symbols_;
    for (const auto& imp : st.imports) {
      FactPtr f = imported_fact(imp);
      if (f->binders.empty()) {
        ctx.ground.push_back(GroundFact{f->formula(), f->origin});
      } else {
        ctx.quantified.push_back(f);
      }
      collect_called_symbols(f->hypothesis, symbols);
      collect_called_symbols(f->conclusion, symbols);
    }
    // Close over spec fn bodies.
    std::vector<std::string> work(symbols.begin(), symbols.end());
    std::set<std::string> seen;
    std::vector<std::string> ordered;
    while (!work.empty()) {
      std::string s = strip_layer(work.back());
      work.pop_back();
      if (!seen.insert(s).second) continue;
      ordered.push_back(s);
      for (const auto& f : gen_.definitional_facts(s)) {
        std::set<std::string> inner;
        collect_called_symbols(f->conclusion, inner);
        for (const auto& i : inner)
          if (!seen.count(strip_layer(i))) work.push_back(i);
      }
    }
    std::sort(ordered.begin(), ordered.end());
    for (const auto& s : ordered) {
      for (const auto& f : gen_.definitional_facts(s)) {
        if (f->binders.empty())
          ctx.ground.push_back(GroundFact{f->formula(), f->origin});
        else
          ctx.quantified.push_back(f);
      }
    }
    return ctx;
  }

  void emit(const Expr& goal, const State& st, ObligationSite site) {
    Obligation ob;
    ob.goal = lower_nat_binders(goal);
    annotate_triggers(ob.goal, gen_.config().strategy, false);
    ob.context = context(st);
    ob.site = std::move(site);
    ob.function = fn_.symbol;
    ob.function_path = fn_.path;
    out_.push_back(std::move(ob));
  }

  void process(const std::vector<Stmt>& stmts, State& st) {
    for (const auto& s : stmts) {
      switch (s.kind) {
        case StmtKind::Assert:
          emit(s.expr, st, ObligationSite{SiteKind::Assert, s.span, 0});
          add_ground(st, s.expr, local(s.span, "assert"));
          break;
        case StmtKind::AssertBy: {
          State inner = st;
          inner.chain.push_back("block " + std::to_string(s.span.line) + ":" + std::to_string(s.span.col));
          add_imports(inner, direct_uses(s.body));
          Expr goal = s.expr;
          if (goal.kind == ExprKind::Forall) {
            for (const auto& b : goal.binders)
              if (b.type.name == "nat") add_ground(inner, mk_nonneg(mk_var(b.name, kInt)), local(s.span, "nat"));
            goal = goal.args[0];
            if (goal.kind == ExprKind::Binary && goal.op == BinaryOp::Implies) {
              add_ground(inner, goal.args[0], local(s.span, "assume"));
              goal = Expr(goal.args[1]);
            }
          }
          process(s.body, inner);
          emit(goal, inner, ObligationSite{SiteKind::Assert, s.span, 0});
          add_ground(st, s.expr, local(s.span, "assert"));
          break;
        }
        case StmtKind::Let: {
          Type t = s.let_type ? *s.let_type : s.expr.type;
          add_ground(st, mk_defeq(mk_var(s.let_name, sort_of(t)), s.expr), local(s.span, "let " + s.let_name));
          break;
        }
        case StmtKind::LemmaCall: {
          const FnInstance& callee = gen_.program().fn(s.expr.symbol);
          std::map<std::string, Expr> subst;
          for (std::size_t i = 0; i < callee.params.size(); ++i) subst[callee.params[i].name] = s.expr.args[i];
          std::size_t idx = 0;
          for (const auto& r : callee.requires_)
            emit(substitute_vars(r, subst), st, ObligationSite{SiteKind::LemmaPrecondition, s.span, idx++});
          for (const auto& p : callee.params)
            if (p.is_nat)
              emit(mk_nonneg(subst.at(p.name)), st, ObligationSite{SiteKind::LemmaPrecondition, s.span, idx++});
          for (const auto& e : callee.ensures)
            add_ground(st, substitute_vars(e, subst), local(s.span, "call " + callee.path));
          break;
        }
        case StmtKind::BroadcastUse:
          break;
      }
    }
  }
};

}  // namespace

std::vector<Obligation> VcGenerator::generate(const FnInstance& fn) {
  FunctionVc vc(*this, fn);
  return vc.run();
}

// ---- SMT-LIB ----

namespace {

std::string smt_sym(const std::string& s) { return "|" + s + "|"; }

std::string smt_sort(const Type& t) {
  Type s = sort_of(t);
  if (s.name == "int") return "Int";
  if (s.name == "bool") return "Bool";
  return smt_sym(s.to_string());
}

struct SmtDecls {
  std::set<std::string> sorts;
  std::map<std::string, std::string> funs;    // symbol -> declaration
  std::map<std::string, std::string> consts;  // name -> sort
};

void smt_collect(const Expr& e, std::set<std::string>& bound, SmtDecls& d) {
  auto note_sort = [&](const Type& t) {
    std::string s = smt_sort(t);
    if (s != "Int" && s != "Bool") d.sorts.insert(s);
  };
  if (!e.type.name.empty()) note_sort(e.type);
  if (e.kind == ExprKind::Var && !bound.count(e.name)) d.consts[e.name] = smt_sort(e.type);
  if (e.kind == ExprKind::Call) {
    std::string sig = "(";
    for (std::size_t i = 0; i < e.args.size(); ++i) sig += (i ? " " : "") + smt_sort(e.args[i].type);
    sig += ") " + smt_sort(e.type);
    d.funs[e.symbol.empty() ? e.name : e.symbol] = sig;
  }
  if (e.kind == ExprKind::Forall || e.kind == ExprKind::Exists) {
    std::vector<std::string> added;
    for (const auto& b : e.binders) {
      note_sort(b.type);
      if (bound.insert(b.name).second) added.push_back(b.name);
    }
    smt_collect(e.args[0], bound, d);
    for (const auto& n : added) bound.erase(n);
    return;
  }
  for (const auto& a : e.args) smt_collect(a, bound, d);
}

void smt_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
      if (e.int_value < 0)
        os << "(- " << -e.int_value << ")";
      else
        os << e.int_value;
      return;
    case ExprKind::BoolLit: os << (e.bool_value ? "true" : "false"); return;
    case ExprKind::Var: os << smt_sym(e.name); return;
    case ExprKind::Call: {
      std::string f = smt_sym(e.symbol.empty() ? e.name : e.symbol);
      if (e.args.empty()) {
        os << f;
        return;
      }
      os << "(" << f;
      for (const auto& a : e.args) {
        os << " ";
        smt_expr(os, a);
      }
      os << ")";
      return;
    }
    case ExprKind::Binary: {
      const char* op = "";
      switch (e.op) {
        case BinaryOp::Add: op = "+"; break;
        case BinaryOp::Sub: op = "-"; break;
        case BinaryOp::Mul: op = "*"; break;
        case BinaryOp::Div: op = "div"; break;
        case BinaryOp::Mod: op = "mod"; break;
        case BinaryOp::Eq: op = "="; break;
        case BinaryOp::Ne: op = "distinct"; break;
        case BinaryOp::Lt: op = "<"; break;
        case BinaryOp::Le: op = "<="; break;
        case BinaryOp::Gt: op = ">"; break;
        case BinaryOp::Ge: op = ">="; break;
        case BinaryOp::And: op = "and"; break;
        case BinaryOp::Or: op = "or"; break;
        case BinaryOp::Implies: op = "=>"; break;
        case BinaryOp::Iff: op = "="; break;
      }
      os << "(" << op << " ";
      smt_expr(os, e.args[0]);
      os << " ";
      smt_expr(os, e.args[1]);
      os << ")";
      return;
    }
    case ExprKind::Unary:
      os << (e.uop == UnaryOp::Not ? "(not " : "(- ");
      smt_expr(os, e.args[0]);
      os << ")";
      return;
    case ExprKind::Ite:
      os << "(ite ";
      for (std::size_t i = 0; i < 3; ++i) {
        if (i) os << " ";
        smt_expr(os, e.args[i]);
      }
      os << ")";
      return;
    case ExprKind::Forall:
    case ExprKind::Exists: {
      os << (e.kind == ExprKind::Forall ? "(forall (" : "(exists (");
      for (std::size_t i = 0; i < e.binders.size(); ++i)
        os << (i ? " " : "") << "(" << smt_sym(e.binders[i].name) << " " << smt_sort(e.binders[i].type) << ")";
      os << ") ";
      if (e.triggers.empty()) {
        smt_expr(os, e.args[0]);
      } else {
        os << "(! ";
        smt_expr(os, e.args[0]);
        for (const auto& g : e.triggers) {
          os << " :pattern (";
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) os << " ";
            smt_expr(os, g[i]);
          }
          os << ")";
        }
        os << ")";
      }
      os << ")";
      return;
    }
  }
}

std::string smt_name(const std::string& label, int idx) {
  std::string out = "f" + std::to_string(idx) + "_";
  for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

std::string emit_smtlib(const Obligation& ob) {
  std::vector<std::pair<Expr, std::string>> asserts;
  for (const auto& g : ob.context.ground) asserts.emplace_back(g.expr, g.origin.label());
  for (const auto& q : ob.context.quantified) asserts.emplace_back(q->formula(), q->origin.label());
  SmtDecls d;
  std::set<std::string> bound;
  for (const auto& [e, l] : asserts) smt_collect(e, bound, d);
  smt_collect(ob.goal, bound, d);

  std::ostringstream os;
  os << "; " << ob.describe() << " in " << ob.function << "\n";
  os << "(set-option :produce-unsat-cores true)\n(set-logic ALL)\n";
  for (const auto& s : d.sorts) os << "(declare-sort " << s << " 0)\n";
  for (const auto& [f, sig] : d.funs) os << "(declare-fun " << smt_sym(f) << " " << sig << ")\n";
  for (const auto& [c, s] : d.consts) os << "(declare-const " << smt_sym(c) << " " << s << ")\n";
  int idx = 0;
  for (const auto& [e, l] : asserts) {
    os << "(assert (! ";
    smt_expr(os, e);
    os << " :named " << smt_name(l, idx++) << "))\n";
  }
  os << "(assert (! (not ";
  smt_expr(os, ob.goal);
  os << ") :named goal))\n(check-sat)\n(get-unsat-core)\n";
  return os.str();
}

}  // namespace tunav
