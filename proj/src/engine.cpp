#include "tunav/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>

namespace tunav {

const char* status_name(Status s) {
  switch (s) {
    case Status::Verified: return "PASS";
    case Status::Failed: return "FAIL";
    case Status::Unknown: return "UNKNOWN";
  }
  return "?";
}

const char* reason_name(UnknownReason r) {
  switch (r) {
    case UnknownReason::None: return "none";
    case UnknownReason::Rounds: return "rounds";
    case UnknownReason::Instantiations: return "instantiations";
    case UnknownReason::Splits: return "splits";
    case UnknownReason::Time: return "time";
  }
  return "?";
}

namespace {

using TermId = int;
using Key = std::vector<std::int64_t>;

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = k.size();
    for (auto v : k) h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

class Symbols {
 public:
  int intern(const std::string& s) {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(s);
    ids_.emplace(s, id);
    return id;
  }
  std::optional<int> find(const std::string& s) const {
    auto it = ids_.find(s);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(int id) const { return names_[id]; }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

enum : int { kNum = 0, kTrue, kFalse, kAdd, kSub, kMul, kDiv, kMod, kNeg, kFirstUser };

void intern_builtins(Symbols& s) {
  for (const char* n : {"#num", "true", "false", "+", "-", "*", "div", "mod", "neg"}) s.intern(n);
}

struct Term {
  int sym = 0;
  std::int64_t value = 0;
  std::vector<TermId> args;
  bool is_int = false;
  bool is_bool = false;
};

class TermGraph {
 public:
  std::vector<Term> terms;
  std::vector<TermId> parent;
  std::vector<std::vector<TermId>> members;
  std::vector<std::vector<TermId>> uses;
  std::vector<std::optional<std::int64_t>> num;
  std::unordered_map<Key, TermId, KeyHash> table;
  std::unordered_map<Key, TermId, KeyHash> sigs;
  std::unordered_map<int, std::vector<TermId>> by_sym;
  bool conflict = false;
  bool int_merged = false;
  TermId true_id = -1, false_id = -1;

  TermId find(TermId t) const {
    while (parent[t] != t) t = parent[t];
    return t;
  }

  Key signature(const Term& t) const {
    Key k{t.sym, t.value};
    for (auto a : t.args) k.push_back(find(a));
    return k;
  }

  TermId make(int sym, std::int64_t value, std::vector<TermId> args, bool is_int, bool is_bool,
              bool* created = nullptr) {
    Key key{sym, value};
    key.insert(key.end(), args.begin(), args.end());
    auto it = table.find(key);
    if (it != table.end()) {
      if (created) *created = false;
      return it->second;
    }
    if (created) *created = true;
    TermId id = static_cast<TermId>(terms.size());
    terms.push_back(Term{sym, value, std::move(args), is_int, is_bool});
    table.emplace(std::move(key), id);
    parent.push_back(id);
    members.push_back({id});
    uses.emplace_back();
    std::optional<std::int64_t> n;
    if (sym == kNum) n = value;
    if (sym == kTrue) n = 1;
    if (sym == kFalse) n = 0;
    num.push_back(n);
    by_sym[sym].push_back(id);
    for (auto a : terms[id].args) uses[find(a)].push_back(id);
    Key sig = signature(terms[id]);
    auto s = sigs.find(sig);
    if (s != sigs.end()) {
      merge(id, s->second);
    } else {
      sigs.emplace(std::move(sig), id);
    }
    return id;
  }

  void merge(TermId a, TermId b) {
    std::vector<std::pair<TermId, TermId>> pending{{a, b}};
    while (!pending.empty() && !conflict) {
      auto [x, y] = pending.back();
      pending.pop_back();
      TermId rx = find(x), ry = find(y);
      if (rx == ry) continue;
      if (members[rx].size() < members[ry].size()) std::swap(rx, ry);
      if (num[rx] && num[ry] && *num[rx] != *num[ry]) {
        conflict = true;
        return;
      }
      if (terms[rx].is_int) int_merged = true;
      parent[ry] = rx;
      if (!num[rx]) num[rx] = num[ry];
      members[rx].insert(members[rx].end(), members[ry].begin(), members[ry].end());
      members[ry].clear();
      for (auto p : uses[ry]) {
        Key sig = signature(terms[p]);
        auto s = sigs.find(sig);
        if (s == sigs.end()) {
          sigs.emplace(std::move(sig), p);
        } else if (find(s->second) != find(p)) {
          pending.emplace_back(p, s->second);
        }
      }
      uses[rx].insert(uses[rx].end(), uses[ry].begin(), uses[ry].end());
      uses[ry].clear();
    }
  }

  // Existing term congruent to sym(value, args), if any.
  std::optional<TermId> lookup(int sym, std::int64_t value, const std::vector<TermId>& args) const {
    Key k{sym, value};
    for (auto a : args) k.push_back(find(a));
    auto it = sigs.find(k);
    if (it == sigs.end()) return std::nullopt;
    return it->second;
  }
};

struct Env {
  std::vector<std::pair<std::string, TermId>> binds;
};
using EnvPtr = std::shared_ptr<const Env>;

std::optional<TermId> env_lookup(const EnvPtr& env, const std::string& name) {
  if (!env) return std::nullopt;
  for (auto it = env->binds.rbegin(); it != env->binds.rend(); ++it)
    if (it->first == name) return it->second;
  return std::nullopt;
}

struct Lit {
  enum Kind { Eq, Ne, BoolT, Arith, Const } kind = Const;
  TermId a = -1, b = -1;
  bool value = true;  // BoolT target, Const value
  LinearConstraint lc;

  static Lit make(Kind k, TermId a = -1, TermId b = -1, bool value = true) {
    Lit l;
    l.kind = k;
    l.a = a;
    l.b = b;
    l.value = value;
    return l;
  }

  Lit negated() const {
    Lit n = *this;
    switch (kind) {
      case Eq: n.kind = Ne; break;
      case Ne: n.kind = Eq; break;
      case BoolT:
      case Const: n.value = !value; break;
      case Arith:
        for (auto& [v, c] : n.lc.terms) c = -c;
        n.lc.constant = -lc.constant + 1;
        break;
    }
    return n;
  }
};

struct Disjunct {
  const Expr* e = nullptr;
  EnvPtr env;
  bool pos = true;
  std::optional<Lit> lit;
};

struct Clause {
  std::vector<Disjunct> ds;
  bool done = false;
};

struct Quant {
  const Expr* q = nullptr;  // Forall or Exists node
  EnvPtr env;
  bool negate = false;  // instantiate the negated body (refuted exists)
  long fact = -1;       // index into the obligation's quantified facts
  std::string label;    // origin label for counting
};

struct MulDef {
  TermId t, a, b;
};

struct State {
  TermGraph g;
  std::vector<LinearConstraint> arith;
  std::vector<MulDef> muls;
  std::vector<std::pair<TermId, TermId>> diseqs;
  std::vector<Clause> clauses;
  std::size_t first_open = 0;
  std::vector<Quant> quants;
  std::vector<std::pair<std::size_t, std::vector<TermId>>> log;
  std::map<std::pair<const Expr*, const Env*>, TermId> fresh_terms;
  std::set<std::pair<TermId, TermId>> divmods;
  int rounds = 0;
  int fresh = 0;
  bool conflict = false;
  bool arith_dirty = true;

  bool failed() const { return conflict || g.conflict; }
};

struct LimitHit {
  UnknownReason reason;
};

using Clock = std::chrono::steady_clock;

class Solver {
 public:
  explicit Solver(const Limits& limits) : limits_(limits), start_(Clock::now()) { intern_builtins(syms_); }

  Limits limits_;
  Symbols syms_;
  Clock::time_point start_;
  long instantiations_ = 0;
  long splits_ = 0;
  int max_rounds_seen_ = 0;
  std::map<std::string, long> per_fact_;
  std::set<std::size_t> instantiated_;
  std::vector<std::string> ground_labels_;

  void init(State& s) {
    s.g.true_id = s.g.make(kTrue, 0, {}, false, true);
    s.g.false_id = s.g.make(kFalse, 0, {}, false, true);
  }

  void check_time() {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count();
    if (ms > limits_.time_budget_ms) throw LimitHit{UnknownReason::Time};
  }

  // ---- internalization ----

  TermId numeral(State& s, std::int64_t v) { return s.g.make(kNum, v, {}, true, false); }

  TermId fresh_const(State& s, const std::string& base, const Type& t) {
    int sym = syms_.intern("sk%" + base + "%" + std::to_string(s.fresh++));
    return s.g.make(sym, 0, {}, t.is_int(), t.is_bool());
  }

  void add_def(State& s, LinearConstraint lc) {
    lc.equality = true;
    s.arith.push_back(std::move(lc));
    s.arith_dirty = true;
  }

  TermId term(State& s, const Expr& e, const EnvPtr& env) {
    switch (e.kind) {
      case ExprKind::IntLit: return numeral(s, e.int_value);
      case ExprKind::BoolLit: return e.bool_value ? s.g.true_id : s.g.false_id;
      case ExprKind::Var: {
        if (auto t = env_lookup(env, e.name)) return *t;
        return s.g.make(syms_.intern("v:" + e.name), 0, {}, e.type.is_int(), e.type.is_bool());
      }
      case ExprKind::Call: {
        std::vector<TermId> args;
        for (const auto& a : e.args) args.push_back(term(s, a, env));
        int sym = syms_.intern(e.symbol.empty() ? e.name : e.symbol);
        return s.g.make(sym, 0, std::move(args), e.type.is_int(), e.type.is_bool());
      }
      case ExprKind::Unary:
        if (e.uop == UnaryOp::Neg) {
          TermId x = term(s, e.args[0], env);
          bool created = false;
          TermId t = s.g.make(kNeg, 0, {x}, true, false, &created);
          if (created) add_def(s, LinearConstraint{{{t, 1}, {x, 1}}, 0, true});
          return t;
        }
        return bool_term(s, e, env);
      case ExprKind::Binary:
        if (is_arithmetic(e.op)) return arith_term(s, e, env);
        return bool_term(s, e, env);
      case ExprKind::Ite: {
        if (e.type.is_bool()) return bool_term(s, e, env);
        auto key = std::make_pair(&e, env.get());
        auto it = s.fresh_terms.find(key);
        if (it != s.fresh_terms.end()) return it->second;
        TermId t = fresh_const(s, "ite", e.type);
        s.fresh_terms[key] = t;
        TermId a = term(s, e.args[1], env), b = term(s, e.args[2], env);
        Clause c1, c2;
        c1.ds.push_back(disjunct(s, e.args[0], env, false));
        c1.ds.push_back(Disjunct{nullptr, env, true, Lit::make(Lit::Eq, t, a)});
        c2.ds.push_back(disjunct(s, e.args[0], env, true));
        c2.ds.push_back(Disjunct{nullptr, env, true, Lit::make(Lit::Eq, t, b)});
        s.clauses.push_back(std::move(c1));
        s.clauses.push_back(std::move(c2));
        return t;
      }
      case ExprKind::Forall:
      case ExprKind::Exists: return bool_term(s, e, env);
    }
    return s.g.true_id;
  }

  TermId arith_term(State& s, const Expr& e, const EnvPtr& env) {
    TermId a = term(s, e.args[0], env), b = term(s, e.args[1], env);
    bool created = false;
    switch (e.op) {
      case BinaryOp::Add: {
        TermId t = s.g.make(kAdd, 0, {a, b}, true, false, &created);
        if (created) add_def(s, LinearConstraint{{{t, 1}}, 0, true}), sub_terms(s.arith.back(), a, b, -1, -1);
        return t;
      }
      case BinaryOp::Sub: {
        TermId t = s.g.make(kSub, 0, {a, b}, true, false, &created);
        if (created) add_def(s, LinearConstraint{{{t, 1}}, 0, true}), sub_terms(s.arith.back(), a, b, -1, 1);
        return t;
      }
      case BinaryOp::Mul: {
        TermId t = s.g.make(kMul, 0, {a, b}, true, false, &created);
        if (created) s.muls.push_back(MulDef{t, a, b});
        return t;
      }
      case BinaryOp::Div:
      case BinaryOp::Mod: {
        TermId d = s.g.make(kDiv, 0, {a, b}, true, false);
        TermId m = s.g.make(kMod, 0, {a, b}, true, false);
        const Term& bt = s.g.terms[b];
        if (bt.sym == kNum && bt.value != 0 && s.divmods.insert({a, b}).second) {
          std::int64_t c = bt.value, ac = c < 0 ? -c : c;
          // a = c*d + m, 0 <= m < |c|
          add_def(s, LinearConstraint{{{a, 1}}, 0, true});
          auto& lc = s.arith.back();
          lc.terms[d] -= c;
          lc.terms[m] -= 1;
          s.arith.push_back(LinearConstraint{{{m, -1}}, 0, false});
          s.arith.push_back(LinearConstraint{{{m, 1}}, 1 - ac, false});
        }
        return e.op == BinaryOp::Div ? d : m;
      }
      default: return s.g.true_id;
    }
  }

  static void sub_terms(LinearConstraint& lc, TermId a, TermId b, std::int64_t ca, std::int64_t cb) {
    lc.terms[a] += ca;
    lc.terms[b] += cb;
    for (auto it = lc.terms.begin(); it != lc.terms.end();) {
      if (it->second == 0)
        it = lc.terms.erase(it);
      else
        ++it;
    }
  }

  // Fresh boolean term b with b <==> e.
  TermId bool_term(State& s, const Expr& e, const EnvPtr& env) {
    auto key = std::make_pair(&e, env.get());
    auto it = s.fresh_terms.find(key);
    if (it != s.fresh_terms.end()) return it->second;
    TermId b = fresh_const(s, "b", Type{"bool", {}});
    s.fresh_terms[key] = b;
    Clause c1, c2;
    c1.ds.push_back(Disjunct{nullptr, env, true, Lit::make(Lit::BoolT, b, -1, false)});
    c1.ds.push_back(disjunct(s, e, env, true));
    c2.ds.push_back(Disjunct{nullptr, env, true, Lit::make(Lit::BoolT, b, -1, true)});
    c2.ds.push_back(disjunct(s, e, env, false));
    s.clauses.push_back(std::move(c1));
    s.clauses.push_back(std::move(c2));
    return b;
  }

  static bool bool_operands(const Expr& e) { return e.args[0].type.is_bool(); }

  LinearConstraint comparison(BinaryOp op, TermId a, TermId b) {
    LinearConstraint lc;
    switch (op) {
      case BinaryOp::Le: sub_terms(lc, a, b, 1, -1); break;
      case BinaryOp::Lt: sub_terms(lc, a, b, 1, -1), lc.constant = 1; break;
      case BinaryOp::Ge: sub_terms(lc, b, a, 1, -1); break;
      default: sub_terms(lc, b, a, 1, -1), lc.constant = 1; break;  // Gt
    }
    return lc;
  }

  std::optional<Lit> make_lit(State& s, const Expr& e, const EnvPtr& env, bool pos) {
    switch (e.kind) {
      case ExprKind::BoolLit: return Lit::make(Lit::Const, -1, -1, e.bool_value == pos);
      case ExprKind::Unary:
        if (e.uop == UnaryOp::Not) return make_lit(s, e.args[0], env, !pos);
        return std::nullopt;
      case ExprKind::Var:
      case ExprKind::Call: return Lit::make(Lit::BoolT, term(s, e, env), -1, pos);
      case ExprKind::Binary:
        if ((e.op == BinaryOp::Eq || e.op == BinaryOp::Ne) && !bool_operands(e)) {
          TermId a = term(s, e.args[0], env), b = term(s, e.args[1], env);
          bool eq = (e.op == BinaryOp::Eq) == pos;
          return Lit::make(eq ? Lit::Eq : Lit::Ne, a, b);
        }
        if (e.op == BinaryOp::Lt || e.op == BinaryOp::Le || e.op == BinaryOp::Gt || e.op == BinaryOp::Ge) {
          TermId a = term(s, e.args[0], env), b = term(s, e.args[1], env);
          Lit l = Lit::make(Lit::Arith);
          l.lc = comparison(e.op, a, b);
          return pos ? l : l.negated();
        }
        return std::nullopt;
      default: return std::nullopt;
    }
  }

  Disjunct disjunct(State& s, const Expr& e, const EnvPtr& env, bool pos) {
    return Disjunct{&e, env, pos, make_lit(s, e, env, pos)};
  }

  void flatten(State& s, const Expr& e, const EnvPtr& env, bool pos, std::vector<Disjunct>& out) {
    if (e.kind == ExprKind::Binary) {
      if ((e.op == BinaryOp::Or && pos) || (e.op == BinaryOp::And && !pos)) {
        flatten(s, e.args[0], env, pos, out);
        flatten(s, e.args[1], env, pos, out);
        return;
      }
      if (e.op == BinaryOp::Implies && pos) {
        flatten(s, e.args[0], env, false, out);
        flatten(s, e.args[1], env, true, out);
        return;
      }
    }
    if (e.kind == ExprKind::Unary && e.uop == UnaryOp::Not) {
      flatten(s, e.args[0], env, !pos, out);
      return;
    }
    out.push_back(disjunct(s, e, env, pos));
  }

  void add_clause(State& s, const Expr& e, const EnvPtr& env, bool pos) {
    Clause c;
    flatten(s, e, env, pos, c.ds);
    s.clauses.push_back(std::move(c));
  }

  void add_clause2(State& s, const Expr& a, bool pa, const Expr& b, bool pb, const EnvPtr& env) {
    Clause c;
    flatten(s, a, env, pa, c.ds);
    flatten(s, b, env, pb, c.ds);
    s.clauses.push_back(std::move(c));
  }

  void assert_lit(State& s, const Lit& l) {
    switch (l.kind) {
      case Lit::Eq: s.g.merge(l.a, l.b); break;
      case Lit::Ne:
        s.diseqs.emplace_back(l.a, l.b);
        if (s.g.terms[l.a].is_int) s.arith_dirty = true;
        break;
      case Lit::BoolT: s.g.merge(l.a, l.value ? s.g.true_id : s.g.false_id); break;
      case Lit::Arith:
        s.arith.push_back(l.lc);
        s.arith_dirty = true;
        break;
      case Lit::Const:
        if (!l.value) s.conflict = true;
        break;
    }
  }

  EnvPtr skolemize(State& s, const Expr& q, const EnvPtr& env) {
    auto out = std::make_shared<Env>(env ? *env : Env{});
    for (const auto& b : q.binders) out->binds.emplace_back(b.name, fresh_const(s, b.name, b.type));
    return out;
  }

  void add(State& s, const Expr& e, const EnvPtr& env, bool pos, const std::string& label, long fact) {
    if (s.failed()) return;
    if (auto l = make_lit(s, e, env, pos)) {
      assert_lit(s, *l);
      return;
    }
    switch (e.kind) {
      case ExprKind::Unary: add(s, e.args[0], env, !pos, label, fact); return;
      case ExprKind::Binary:
        switch (e.op) {
          case BinaryOp::And:
            if (pos) {
              add(s, e.args[0], env, true, label, fact);
              add(s, e.args[1], env, true, label, fact);
            } else {
              add_clause(s, e, env, false);
            }
            return;
          case BinaryOp::Or:
            if (pos) {
              add_clause(s, e, env, true);
            } else {
              add(s, e.args[0], env, false, label, fact);
              add(s, e.args[1], env, false, label, fact);
            }
            return;
          case BinaryOp::Implies:
            if (pos) {
              add_clause(s, e, env, true);
            } else {
              add(s, e.args[0], env, true, label, fact);
              add(s, e.args[1], env, false, label, fact);
            }
            return;
          case BinaryOp::Iff:
          case BinaryOp::Eq:
          case BinaryOp::Ne: {
            bool same = (e.op != BinaryOp::Ne) == pos;
            const Expr& a = e.args[0];
            const Expr& b = e.args[1];
            if (same) {
              add_clause2(s, a, false, b, true, env);
              add_clause2(s, a, true, b, false, env);
            } else {
              add_clause2(s, a, true, b, true, env);
              add_clause2(s, a, false, b, false, env);
            }
            return;
          }
          default: return;
        }
      case ExprKind::Ite:
        add_clause2(s, e.args[0], false, e.args[1], pos, env);
        add_clause2(s, e.args[0], true, e.args[2], pos, env);
        return;
      case ExprKind::Forall:
      case ExprKind::Exists: {
        bool universal = (e.kind == ExprKind::Forall) == pos;
        if (universal) {
          s.quants.push_back(Quant{&e, env, !pos, fact, label});
        } else {
          EnvPtr sk = skolemize(s, e, env);
          add(s, e.args[0], sk, pos, label, fact);
        }
        return;
      }
      default: return;
    }
  }

  // ---- evaluation and propagation ----

  // 1 true, 0 false, -1 unknown.
  int eval(State& s, const Lit& l) {
    auto& g = s.g;
    switch (l.kind) {
      case Lit::Const: return l.value ? 1 : 0;
      case Lit::BoolT: {
        TermId r = g.find(l.a);
        if (r == g.find(g.true_id)) return l.value ? 1 : 0;
        if (r == g.find(g.false_id)) return l.value ? 0 : 1;
        return -1;
      }
      case Lit::Eq:
      case Lit::Ne: {
        int v = equal_value(s, l.a, l.b);
        if (v < 0) return -1;
        return l.kind == Lit::Eq ? v : 1 - v;
      }
      case Lit::Arith: {
        std::int64_t total = l.lc.constant;
        for (const auto& [t, c] : l.lc.terms) {
          auto n = g.num[g.find(t)];
          if (!n) return -1;
          total += c * *n;
        }
        return total <= 0 ? 1 : 0;
      }
    }
    return -1;
  }

  int equal_value(State& s, TermId a, TermId b) {
    auto& g = s.g;
    TermId ra = g.find(a), rb = g.find(b);
    if (ra == rb) return 1;
    if (g.num[ra] && g.num[rb]) return 0;
    for (const auto& [x, y] : s.diseqs) {
      TermId rx = g.find(x), ry = g.find(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return 0;
    }
    return -1;
  }

  void assert_disjunct(State& s, const Disjunct& d) {
    if (d.lit)
      assert_lit(s, *d.lit);
    else
      add(s, *d.e, d.env, d.pos, "", -1);
  }

  void assert_negation(State& s, const Disjunct& d) {
    if (d.lit)
      assert_lit(s, d.lit->negated());
    else
      add(s, *d.e, d.env, !d.pos, "", -1);
  }

  // Unit propagation over clauses. Returns false on conflict.
  bool propagate(State& s) {
    bool changed = true;
    while (changed && !s.failed()) {
      changed = false;
      for (std::size_t i = s.first_open; i < s.clauses.size() && !s.failed(); ++i) {
        if (s.clauses[i].done) continue;
        int open = 0;
        std::size_t last = 0;
        bool sat = false;
        for (std::size_t j = 0; j < s.clauses[i].ds.size(); ++j) {
          const Disjunct& d = s.clauses[i].ds[j];
          int v = d.lit ? eval(s, *d.lit) : -1;
          if (v == 1) {
            sat = true;
            break;
          }
          if (v == -1) {
            ++open;
            last = j;
          }
        }
        if (sat) {
          s.clauses[i].done = true;
          changed = true;
        } else if (open == 0) {
          s.conflict = true;
        } else if (open == 1) {
          s.clauses[i].done = true;
          Disjunct d = s.clauses[i].ds[last];
          assert_disjunct(s, d);
          changed = true;
        }
      }
      while (s.first_open < s.clauses.size() && s.clauses[s.first_open].done) ++s.first_open;
    }
    if (s.failed()) return false;
    for (const auto& [a, b] : s.diseqs)
      if (s.g.find(a) == s.g.find(b)) return false;
    return true;
  }

  LinearConstraint map_constraint(State& s, const LinearConstraint& lc) {
    LinearConstraint out;
    out.equality = lc.equality;
    out.constant = lc.constant;
    for (const auto& [t, c] : lc.terms) {
      TermId r = s.g.find(static_cast<TermId>(t));
      if (auto n = s.g.num[r])
        out.constant += c * *n;
      else
        out.terms[r] += c;
    }
    for (auto it = out.terms.begin(); it != out.terms.end();) {
      if (it->second == 0)
        it = out.terms.erase(it);
      else
        ++it;
    }
    return out;
  }

  std::vector<LinearConstraint> mapped(State& s) {
    std::vector<LinearConstraint> out;
    out.reserve(s.arith.size() + s.muls.size());
    for (const auto& lc : s.arith) out.push_back(map_constraint(s, lc));
    for (const auto& m : s.muls) {
      auto na = s.g.num[s.g.find(m.a)], nb = s.g.num[s.g.find(m.b)];
      if (!na && !nb) continue;
      LinearConstraint lc{{{m.t, 1}}, 0, true};
      if (na)
        lc.terms[m.b] -= *na;
      else
        lc.terms[m.a] -= *nb;
      out.push_back(map_constraint(s, lc));
    }
    return out;
  }

  // Returns false on conflict; sets `merged` when new equalities were found.
  bool arith_check(State& s, bool& merged) {
    merged = false;
    if (!s.arith_dirty && !s.g.int_merged) return true;
    s.arith_dirty = false;
    s.g.int_merged = false;
    auto cs = mapped(s);
    if (arith_consistent(cs, limits_.max_fm_eliminations) == ArithResult::Inconsistent) return false;
    ImpliedEqualities ie = implied_equalities(cs);
    if (ie.inconsistent) return false;
    for (const auto& grp : ie.equal_groups)
      for (std::size_t i = 1; i < grp.size(); ++i) {
        if (s.g.find(grp[0]) != s.g.find(grp[i])) {
          s.g.merge(static_cast<TermId>(grp[0]), static_cast<TermId>(grp[i]));
          merged = true;
        }
      }
    for (const auto& [v, c] : ie.fixed) {
      TermId n = numeral(s, c);
      if (s.g.find(n) != s.g.find(static_cast<TermId>(v))) {
        s.g.merge(static_cast<TermId>(v), n);
        merged = true;
      }
    }
    return !s.g.conflict;
  }

  // An integer disequality contradicts arithmetic if both strict orders do.
  bool diseq_conflict(State& s) {
    std::vector<LinearConstraint> base;
    bool have_base = false;
    for (const auto& [a, b] : s.diseqs) {
      if (!s.g.terms[a].is_int) continue;
      if (!have_base) {
        base = mapped(s);
        have_base = true;
      }
      for (int dir = 0; dir < 2; ++dir) {
        LinearConstraint lt;
        sub_terms(lt, dir ? b : a, dir ? a : b, 1, -1);
        lt.constant = 1;
        auto cs = base;
        cs.push_back(map_constraint(s, lt));
        if (arith_consistent(cs, limits_.max_fm_eliminations) != ArithResult::Inconsistent) goto next;
      }
      return true;
    next:;
    }
    return false;
  }

  // ---- e-matching ----

  using Binding = std::vector<TermId>;
  using Cont = std::function<void(Binding&)>;

  int binder_index(const Quant& q, const std::string& name) const {
    for (std::size_t i = 0; i < q.q->binders.size(); ++i)
      if (q.q->binders[i].name == name) return static_cast<int>(i);
    return -1;
  }

  std::optional<int> pattern_sym(const Expr& p) const {
    if (p.kind == ExprKind::Call) return syms_.find(p.symbol.empty() ? p.name : p.symbol);
    if (p.kind == ExprKind::Binary) {
      switch (p.op) {
        case BinaryOp::Add: return kAdd;
        case BinaryOp::Sub: return kSub;
        case BinaryOp::Mul: return kMul;
        case BinaryOp::Div: return kDiv;
        case BinaryOp::Mod: return kMod;
        default: return std::nullopt;
      }
    }
    if (p.kind == ExprKind::Unary && p.uop == UnaryOp::Neg) return kNeg;
    return std::nullopt;
  }

  void match_class(State& s, const Quant& q, const Expr& p, TermId cls, Binding& b, const Cont& k) {
    auto& g = s.g;
    switch (p.kind) {
      case ExprKind::Var: {
        int idx = binder_index(q, p.name);
        if (idx >= 0) {
          if (b[idx] < 0) {
            b[idx] = cls;
            k(b);
            b[idx] = -1;
          } else if (g.find(b[idx]) == cls) {
            k(b);
          }
          return;
        }
        if (auto t = env_lookup(q.env, p.name)) {
          if (g.find(*t) == cls) k(b);
          return;
        }
        auto sym = syms_.find("v:" + p.name);
        if (!sym) return;
        for (auto m : g.members[cls])
          if (g.terms[m].sym == *sym) {
            k(b);
            return;
          }
        return;
      }
      case ExprKind::IntLit:
        if (g.num[cls] && *g.num[cls] == p.int_value && g.terms[cls].is_int) k(b);
        return;
      case ExprKind::BoolLit:
        if (cls == g.find(p.bool_value ? g.true_id : g.false_id)) k(b);
        return;
      default: break;
    }
    auto sym = pattern_sym(p);
    if (!sym) return;
    // Copy: continuations never modify the graph, but keep iteration safe.
    std::vector<TermId> ms = g.members[cls];
    std::set<Key> seen;
    for (auto m : ms) {
      const Term& t = g.terms[m];
      if (t.sym != *sym || t.args.size() != p.args.size()) continue;
      if (!seen.insert(g.signature(t)).second) continue;
      match_args(s, q, p, m, 0, b, k);
    }
  }

  void match_args(State& s, const Quant& q, const Expr& p, TermId t, std::size_t i, Binding& b, const Cont& k) {
    if (i == p.args.size()) {
      k(b);
      return;
    }
    TermId arg = s.g.find(s.g.terms[t].args[i]);
    match_class(s, q, p.args[i], arg, b, [&](Binding& b2) { match_args(s, q, p, t, i + 1, b2, k); });
  }

  void match_group(State& s, const Quant& q, const TriggerPatterns& pats, std::size_t i, Binding& b,
                   std::size_t frozen, const Cont& k) {
    if (i == pats.size()) {
      k(b);
      return;
    }
    const Expr& p = pats[i];
    auto sym = pattern_sym(p);
    if (!sym) return;
    auto it = s.g.by_sym.find(*sym);
    if (it == s.g.by_sym.end()) return;
    const auto& candidates = it->second;
    std::set<Key> seen;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      TermId t = candidates[c];
      if (static_cast<std::size_t>(t) >= frozen) break;
      if (s.g.terms[t].args.size() != p.args.size()) continue;
      if (!seen.insert(s.g.signature(s.g.terms[t])).second) continue;
      match_args(s, q, p, t, 0, b, [&](Binding& b2) { match_group(s, q, pats, i + 1, b2, frozen, k); });
    }
  }

  std::set<std::pair<std::size_t, std::vector<TermId>>> log_keys(State& s) {
    std::set<std::pair<std::size_t, std::vector<TermId>>> keys;
    for (const auto& [qi, bind] : s.log) {
      std::vector<TermId> r;
      for (auto t : bind) r.push_back(s.g.find(t));
      keys.emplace(qi, std::move(r));
    }
    return keys;
  }

  struct Match {
    std::size_t quant;
    std::vector<TermId> binding;
  };

  std::vector<Match> collect_matches(State& s, std::optional<std::size_t> only_quant = std::nullopt,
                                     std::optional<std::size_t> only_group = std::nullopt) {
    auto keys = log_keys(s);
    std::vector<Match> out;
    std::size_t frozen = s.g.terms.size();
    for (std::size_t qi = 0; qi < s.quants.size(); ++qi) {
      if (only_quant && *only_quant != qi) continue;
      const Quant& q = s.quants[qi];
      for (std::size_t gi = 0; gi < q.q->triggers.size(); ++gi) {
        if (only_group && *only_group != gi) continue;
        Binding b(q.q->binders.size(), -1);
        match_group(s, q, q.q->triggers[gi], 0, b, frozen, [&](Binding& full) {
          std::vector<TermId> reps;
          for (auto t : full) reps.push_back(s.g.find(t));
          if (keys.emplace(qi, reps).second) out.push_back(Match{qi, reps});
        });
        check_time();
      }
    }
    return out;
  }

  void instantiate(State& s, const Match& m) {
    const Quant& q = s.quants[m.quant];
    auto env = std::make_shared<Env>(q.env ? *q.env : Env{});
    for (std::size_t i = 0; i < q.q->binders.size(); ++i) env->binds.emplace_back(q.q->binders[i].name, m.binding[i]);
    s.log.emplace_back(m.quant, m.binding);
    ++instantiations_;
    per_fact_[q.label]++;
    if (q.fact >= 0) instantiated_.insert(static_cast<std::size_t>(q.fact));
    std::string label = q.label;
    long fact = q.fact;
    add(s, q.q->body(), env, !q.negate, label, fact);
  }

  // ---- search ----

  enum class Result { Refuted, Failed };

  Result solve(State& s) {
    for (;;) {
      check_time();
      if (!propagate(s)) return Result::Refuted;
      bool merged = false;
      if (!arith_check(s, merged)) return Result::Refuted;
      if (merged) continue;
      if (s.first_open < s.clauses.size()) {
        std::size_t ci = s.first_open;
        while (ci < s.clauses.size() && s.clauses[ci].done) ++ci;
        if (ci < s.clauses.size()) return split(s, ci);
      }
      if (diseq_conflict(s)) return Result::Refuted;
      auto matches = collect_matches(s);
      if (matches.empty()) return Result::Failed;
      if (s.rounds >= limits_.max_rounds) throw LimitHit{UnknownReason::Rounds};
      ++s.rounds;
      max_rounds_seen_ = std::max(max_rounds_seen_, s.rounds);
      for (const auto& m : matches) {
        if (instantiations_ >= limits_.max_instantiations) throw LimitHit{UnknownReason::Instantiations};
        instantiate(s, m);
        if (s.failed()) break;
      }
    }
  }

  Result split(State& s, std::size_t ci) {
    if (++splits_ > limits_.max_splits) throw LimitHit{UnknownReason::Splits};
    s.clauses[ci].done = true;
    std::vector<Disjunct> ds = s.clauses[ci].ds;
    // Drop disjuncts already false.
    std::vector<Disjunct> open;
    for (const auto& d : ds)
      if (!(d.lit && eval(s, *d.lit) == 0)) open.push_back(d);
    for (std::size_t i = 0; i < open.size(); ++i) {
      bool last = i + 1 == open.size();
      State child_storage;
      State& child = last ? s : (child_storage = s);
      for (std::size_t j = 0; j < i; ++j) assert_negation(child, open[j]);
      assert_disjunct(child, open[i]);
      if (solve(child) == Result::Failed) return Result::Failed;
    }
    return Result::Refuted;
  }
};

}  // namespace

// ---- public API ----

struct Prover::Impl {
  Solver solver;
  State state;
  std::deque<Expr> arena;
  std::vector<std::size_t> fact_quant;

  explicit Impl(const Limits& l) : solver(l) { solver.init(state); }
};

Prover::Prover(Limits limits) : impl_(std::make_unique<Impl>(limits)) {}
Prover::~Prover() = default;

void Prover::assert_ground(const Expr& e) {
  impl_->arena.push_back(e);
  impl_->solver.add(impl_->state, impl_->arena.back(), nullptr, true, "ground", -1);
}

std::size_t Prover::add_fact(const QuantifiedFact& fact) {
  impl_->arena.push_back(fact.formula());
  std::size_t idx = impl_->fact_quant.size();
  std::size_t before = impl_->state.quants.size();
  impl_->solver.add(impl_->state, impl_->arena.back(), nullptr, true, fact.origin.label(), static_cast<long>(idx));
  impl_->fact_quant.push_back(before);
  return idx;
}

std::vector<std::map<std::string, std::string>> Prover::ematch(std::size_t fact, std::size_t group) {
  auto& s = impl_->state;
  auto& solver = impl_->solver;
  std::size_t qi = impl_->fact_quant.at(fact);
  auto matches = solver.collect_matches(s, qi, group);
  std::vector<std::map<std::string, std::string>> out;
  const Quant& q = s.quants[qi];
  std::function<std::string(TermId)> show = [&](TermId t) -> std::string {
    const Term& term = s.g.terms[t];
    if (term.sym == kNum) return std::to_string(term.value);
    std::string name = solver.syms_.name(term.sym);
    if (name.rfind("v:", 0) == 0) name = name.substr(2);
    if (term.args.empty()) return name;
    std::string r = name + "(";
    for (std::size_t i = 0; i < term.args.size(); ++i) r += (i ? ", " : "") + show(term.args[i]);
    return r + ")";
  };
  for (const auto& m : matches) {
    std::map<std::string, std::string> sub;
    for (std::size_t i = 0; i < m.binding.size(); ++i) {
      TermId r = s.g.find(m.binding[i]);
      // Prefer a numeral, else the oldest member, for a stable rendering.
      TermId shown = r;
      for (auto mem : s.g.members[r])
        if (s.g.terms[mem].sym == kNum) shown = mem;
      if (s.g.terms[shown].sym != kNum) shown = *std::min_element(s.g.members[r].begin(), s.g.members[r].end());
      sub[q.q->binders[i].name] = show(shown);
    }
    out.push_back(std::move(sub));
  }
  return out;
}

long Prover::instantiate_round() {
  auto& s = impl_->state;
  auto& solver = impl_->solver;
  solver.propagate(s);
  auto matches = solver.collect_matches(s);
  for (const auto& m : matches) solver.instantiate(s, m);
  return static_cast<long>(matches.size());
}

bool Prover::refuted() {
  auto& s = impl_->state;
  auto& solver = impl_->solver;
  if (!solver.propagate(s)) return true;
  bool merged = false;
  if (!solver.arith_check(s, merged)) return true;
  if (merged && !solver.propagate(s)) return true;
  return solver.diseq_conflict(s);
}

std::size_t Prover::term_count() const { return impl_->state.g.terms.size(); }

Outcome prove(const Obligation& ob, const Limits& limits) {
  auto t0 = std::chrono::steady_clock::now();
  Solver solver(limits);
  State state;
  solver.init(state);
  std::deque<Expr> arena;
  Outcome out;
  Status status = Status::Failed;
  try {
    for (const auto& g : ob.context.ground) {
      out.used_core.insert(g.origin);
      solver.add(state, g.expr, nullptr, true, g.origin.label(), -1);
    }
    for (std::size_t i = 0; i < ob.context.quantified.size(); ++i) {
      const auto& f = ob.context.quantified[i];
      arena.push_back(f->formula());
      solver.add(state, arena.back(), nullptr, true, f->origin.label(), static_cast<long>(i));
    }
    solver.add(state, ob.goal, nullptr, false, "goal", -1);
    status = solver.solve(state) == Solver::Result::Refuted ? Status::Verified : Status::Failed;
  } catch (const LimitHit& hit) {
    status = Status::Unknown;
    out.reason = hit.reason;
  }
  out.status = status;
  out.instantiated_facts = solver.instantiated_;
  for (auto i : solver.instantiated_) out.used_core.insert(ob.context.quantified[i]->origin);
  out.metrics.instantiations = solver.instantiations_;
  out.metrics.rounds = solver.max_rounds_seen_;
  out.metrics.splits = solver.splits_;
  out.metrics.per_fact = solver.per_fact_;
  out.metrics.time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace tunav
