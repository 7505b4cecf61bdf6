#include <functional>
#include <map>
#include <stdexcept>

#include "tunav/engine.hpp"

namespace tunav {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

std::int64_t euclid_div(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  std::int64_t q = a / b, r = a % b;
  if (r < 0) q += b > 0 ? -1 : 1;
  return q;
}

std::int64_t euclid_mod(std::int64_t a, std::int64_t b) {
  if (b == 0) return a;
  return a - b * euclid_div(a, b);
}

class Evaluator {
 public:
  explicit Evaluator(const FiniteInterpretation& interp) : interp_(interp) {}

  std::int64_t eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return e.int_value;
      case ExprKind::BoolLit: return e.bool_value ? 1 : 0;
      case ExprKind::Var: {
        auto it = env_.find(e.name);
        if (it != env_.end() && !it->second.empty()) return it->second.back();
        return uninterpreted("v:" + e.name, {}, e.type);
      }
      case ExprKind::Call: {
        std::vector<std::int64_t> args;
        for (const auto& a : e.args) args.push_back(eval(a));
        return uninterpreted(e.symbol.empty() ? e.name : e.symbol, args, e.type);
      }
      case ExprKind::Unary:
        return e.uop == UnaryOp::Neg ? -eval(e.args[0]) : (eval(e.args[0]) ? 0 : 1);
      case ExprKind::Ite: return eval(e.args[0]) ? eval(e.args[1]) : eval(e.args[2]);
      case ExprKind::Binary: return binary(e);
      case ExprKind::Forall:
      case ExprKind::Exists: return quantifier(e);
    }
    return 0;
  }

 private:
  std::int64_t uninterpreted(const std::string& sym, const std::vector<std::int64_t>& args, const Type& t) {
    std::uint64_t h = mix(interp_.seed, std::hash<std::string>{}(sym));
    for (auto a : args) h = mix(h, static_cast<std::uint64_t>(a));
    if (t.is_bool()) return static_cast<std::int64_t>((h >> 7) & 1);
    return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(interp_.domain));
  }

  std::int64_t binary(const Expr& e) {
    switch (e.op) {
      case BinaryOp::And: return eval(e.args[0]) && eval(e.args[1]);
      case BinaryOp::Or: return eval(e.args[0]) || eval(e.args[1]);
      case BinaryOp::Implies: return !eval(e.args[0]) || eval(e.args[1]);
      case BinaryOp::Iff: return (eval(e.args[0]) != 0) == (eval(e.args[1]) != 0);
      default: break;
    }
    std::int64_t a = eval(e.args[0]), b = eval(e.args[1]);
    switch (e.op) {
      case BinaryOp::Add: return a + b;
      case BinaryOp::Sub: return a - b;
      case BinaryOp::Mul: return a * b;
      case BinaryOp::Div: return euclid_div(a, b);
      case BinaryOp::Mod: return euclid_mod(a, b);
      case BinaryOp::Eq: return a == b;
      case BinaryOp::Ne: return a != b;
      case BinaryOp::Lt: return a < b;
      case BinaryOp::Le: return a <= b;
      case BinaryOp::Gt: return a > b;
      case BinaryOp::Ge: return a >= b;
      default: return 0;
    }
  }

  // Literal bounds on `name` found in a conjunctive guard.
  static void bounds(const Expr& g, const std::string& name, std::optional<std::int64_t>& lo,
                     std::optional<std::int64_t>& hi) {
    if (g.kind != ExprKind::Binary) return;
    if (g.op == BinaryOp::And) {
      bounds(g.args[0], name, lo, hi);
      bounds(g.args[1], name, lo, hi);
      return;
    }
    const Expr& l = g.args[0];
    const Expr& r = g.args[1];
    auto is_var = [&](const Expr& x) { return x.kind == ExprKind::Var && x.name == name; };
    auto lit = [](const Expr& x) -> std::optional<std::int64_t> {
      if (x.kind == ExprKind::IntLit) return x.int_value;
      if (x.kind == ExprKind::Unary && x.uop == UnaryOp::Neg && x.args[0].kind == ExprKind::IntLit)
        return -x.args[0].int_value;
      return std::nullopt;
    };
    auto lower = [&](std::int64_t v) { lo = lo ? std::max(*lo, v) : v; };
    auto upper = [&](std::int64_t v) { hi = hi ? std::min(*hi, v) : v; };
    if (is_var(r) && lit(l)) {
      std::int64_t v = *lit(l);
      if (g.op == BinaryOp::Le) lower(v);
      if (g.op == BinaryOp::Lt) lower(v + 1);
      if (g.op == BinaryOp::Ge) upper(v);
      if (g.op == BinaryOp::Gt) upper(v - 1);
    } else if (is_var(l) && lit(r)) {
      std::int64_t v = *lit(r);
      if (g.op == BinaryOp::Le) upper(v);
      if (g.op == BinaryOp::Lt) upper(v - 1);
      if (g.op == BinaryOp::Ge) lower(v);
      if (g.op == BinaryOp::Gt) lower(v + 1);
    }
  }

  std::int64_t quantifier(const Expr& q) {
    bool forall = q.kind == ExprKind::Forall;
    const Expr& body = q.body();
    BinaryOp guard_op = forall ? BinaryOp::Implies : BinaryOp::And;
    const Expr* guard = (body.kind == ExprKind::Binary && body.op == guard_op) ? &body.args[0] : nullptr;
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (const auto& b : q.binders) {
      if (!b.type.is_int()) {
        if (b.type.is_bool())
          ranges.emplace_back(0, 1);
        else
          ranges.emplace_back(0, interp_.domain - 1);
        continue;
      }
      std::optional<std::int64_t> lo, hi;
      if (guard) bounds(*guard, b.name, lo, hi);
      if (!lo || !hi) throw std::domain_error("quantifier over '" + b.name + "' lacks literal bounds");
      ranges.emplace_back(*lo, *hi);
    }
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
      if (i == q.binders.size()) return eval(body) != 0;
      auto& slot = env_[q.binders[i].name];
      for (std::int64_t v = ranges[i].first; v <= ranges[i].second; ++v) {
        slot.push_back(v);
        bool r = go(i + 1);
        env_[q.binders[i].name].pop_back();
        if (r != forall) return r;
      }
      return forall;
    };
    return go(0) ? 1 : 0;
  }

  FiniteInterpretation interp_;
  std::map<std::string, std::vector<std::int64_t>> env_;
};

}  // namespace

bool eval_finite(const Expr& formula, const FiniteInterpretation& interp) {
  Evaluator ev(interp);
  return ev.eval(formula) != 0;
}

}  // namespace tunav
