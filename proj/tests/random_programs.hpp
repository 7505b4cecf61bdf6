#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tunav/engine.hpp"

namespace tunav::testing {

// Random small programs over uninterpreted functions; every hypothesis and
// goal stays within the fragment the finite evaluator accepts.
class Gen {
 public:
  explicit Gen(std::uint32_t seed) : rng_(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string term(int depth, const std::string& bound = "") {
    int choice = pick(depth > 0 ? 7 : 3);
    switch (choice) {
      case 0: {
        std::vector<std::string> leaves{"a", "b", "c"};
        if (!bound.empty()) leaves.push_back(bound);
        return leaves[pick(static_cast<int>(leaves.size()))];
      }
      case 1: return std::to_string(pick(3));
      case 2: return bound.empty() ? "a" : bound;
      case 3: return "f(" + term(depth - 1, bound) + ")";
      case 4: return "g(" + term(depth - 1, bound) + ", " + term(depth - 1, bound) + ")";
      case 5: return "(" + term(depth - 1, bound) + " + " + term(depth - 1, bound) + ")";
      default: return "(" + term(depth - 1, bound) + " - " + term(depth - 1, bound) + ")";
    }
  }

  std::string atom(const std::string& bound = "") {
    static const char* ops[] = {"==", "!=", "<", "<=", ">"};
    switch (pick(4)) {
      case 0: return "p(" + term(1, bound) + ")";
      case 1: return "!(" + term(1, bound) + " == " + term(1, bound) + ")";
      default: return term(2, bound) + " " + ops[pick(5)] + " " + term(2, bound);
    }
  }

  std::string formula() {
    switch (pick(4)) {
      case 0: return "(" + atom() + " || " + atom() + ")";
      case 1: return "(" + atom() + " ==> " + atom() + ")";
      default: return atom();
    }
  }

  std::string quantified() {
    return "forall|i: int| 0 <= i < 3 ==> #[trigger] f(i) " + std::string(pick(2) ? "==" : "<=") + " " +
           term(1, "i");
  }

  std::string program() {
    std::ostringstream os;
    os << "module rnd;\n"
       << "spec fn f(x: int) -> int;\nspec fn g(x: int, y: int) -> int;\nspec fn p(x: int) -> bool;\n"
       << "proof fn t(a: int, b: int, c: int)\n    requires ";
    std::vector<std::string> hyps;
    int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) hyps.push_back(formula());
    if (pick(2)) hyps.push_back(quantified());
    for (const auto& h : hyps) os << h << ", ";
    std::string goal;
    switch (pick(4)) {
      case 0: goal = hyps[0] + " || " + atom(); break;  // often provable
      case 1: goal = "f(" + std::to_string(pick(3)) + ") <= " + term(1); break;
      default: goal = formula(); break;
    }
    os << "\n{\n    assert(" << goal << ");\n}\n";
    return os.str();
  }

 private:
  std::mt19937 rng_;
};

inline Expr conj(const std::vector<Expr>& parts) {
  Expr out;
  out.kind = ExprKind::BoolLit;
  out.bool_value = true;
  out.type = Type{"bool", {}};
  for (const auto& p : parts) {
    Expr a;
    a.kind = ExprKind::Binary;
    a.op = BinaryOp::And;
    a.type = Type{"bool", {}};
    a.args = {out, p};
    out = std::move(a);
  }
  return out;
}

struct SoundnessTally {
  int verified = 0, failed = 0, unknown = 0;
  std::vector<std::string> violations;  // sources whose Verified verdict the oracle refutes
};

// Proves `programs` random obligations; each Verified one is evaluated under
// `interpretations` finite interpretations of hypotheses ==> goal.
inline SoundnessTally run_soundness_suite(std::uint32_t programs, std::uint64_t interpretations) {
  SoundnessTally t;
  for (std::uint32_t seed = 0; seed < programs; ++seed) {
    Gen gen(seed);
    std::string src = gen.program();
    std::vector<ProgramAst> asts{parse_module(src, "rnd.tv")};
    Program program = resolve_program(asts);
    BroadcastRegistry registry = build_registry(program);
    VcGenerator vc(program, registry, {});
    auto obs = vc.generate(program.fn("rnd::t"));
    const Obligation& ob = obs.back();
    Limits limits;
    limits.time_budget_ms = 2000;
    Outcome out = prove(ob, limits);
    if (out.status == Status::Failed) {
      ++t.failed;
      continue;
    }
    if (out.status == Status::Unknown) {
      ++t.unknown;
      continue;
    }
    ++t.verified;
    std::vector<Expr> hyps;
    for (const auto& g : ob.context.ground) hyps.push_back(g.expr);
    for (const auto& q : ob.context.quantified)
      if (q->origin.kind == OriginKind::LocalHypothesis) hyps.push_back(q->formula());
    Expr implication;
    implication.kind = ExprKind::Binary;
    implication.op = BinaryOp::Implies;
    implication.type = Type{"bool", {}};
    implication.args = {conj(hyps), ob.goal};
    for (std::uint64_t s = 0; s < interpretations; ++s) {
      if (!eval_finite(implication, FiniteInterpretation{3, s * 7919 + seed})) {
        t.violations.push_back(src);
        break;
      }
    }
  }
  return t;
}

}  // namespace tunav::testing
