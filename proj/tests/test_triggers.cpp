#include <doctest.h>

#include <random>
#include <set>

#include "tunav/triggers.hpp"

using namespace tunav;

namespace {

std::set<std::string> rendered(const std::vector<Expr>& es) {
  std::set<std::string> out;
  for (const auto& e : es) out.insert(render_expr(e));
  return out;
}

std::vector<std::vector<std::string>> groups_of(const TriggerSelection& sel) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : sel.groups) {
    std::vector<std::string> r;
    for (const auto& e : g.exprs) r.push_back(render_expr(e));
    out.push_back(r);
  }
  return out;
}

TriggerSelection infer(const std::string& quant, TriggerStrategy s = TriggerStrategy::Conservative) {
  Expr q = parse_expr(quant);
  return infer_triggers(q.binders, q.body(), s, q.all_triggers, q.span);
}

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var) out.insert(e.name);
  for (const auto& a : e.args) collect_vars(a, out);
}

const char* kIsEven = "forall|i: int| 0 <= i < s.len() ==> #[trigger] is_even(s.index(i))";
const char* kIsEvenUnmarked = "forall|i: int| 0 <= i < s.len() ==> is_even(s.index(i))";

}  // namespace

TEST_CASE("candidates for the is_even quantifier") {
  Expr q = parse_expr(kIsEvenUnmarked);
  CHECK(rendered(valid_trigger_candidates(q.binders, q.body())) ==
        std::set<std::string>{"is_even(s.index(i))", "s.index(i)"});
}

TEST_CASE("candidates: none and arithmetic") {
  Expr q = parse_expr("forall|x: int| x == x");
  CHECK(valid_trigger_candidates(q.binders, q.body()).empty());
  Expr r = parse_expr("forall|i: int| f(i + 1)");
  CHECK(rendered(valid_trigger_candidates(r.binders, r.body())) == std::set<std::string>{"f(i + 1)", "i + 1"});
}

TEST_CASE("manual marks override strategies") {
  for (auto s : {TriggerStrategy::Conservative, TriggerStrategy::AllTriggers}) {
    TriggerSelection sel = infer(kIsEven, s);
    CHECK(sel.strategy_used == TriggerSource::Manual);
    CHECK(groups_of(sel) == std::vector<std::vector<std::string>>{{"is_even(s.index(i))"}});
  }
}

TEST_CASE("all_triggers prunes the larger candidate") {
  TriggerSelection sel = infer(kIsEvenUnmarked, TriggerStrategy::AllTriggers);
  CHECK(groups_of(sel) == std::vector<std::vector<std::string>>{{"s.index(i)"}});
  TriggerSelection attr = infer("forall|i: int| #![all_triggers] 0 <= i < s.len() ==> is_even(s.index(i))");
  CHECK(groups_of(attr) == std::vector<std::vector<std::string>>{{"s.index(i)"}});
}

TEST_CASE("conservative picks one group deterministically") {
  CHECK(groups_of(infer("forall|x: int| f(x) == g(x)")) == std::vector<std::vector<std::string>>{{"f(x)"}});
  CHECK(groups_of(infer(kIsEvenUnmarked)) == std::vector<std::vector<std::string>>{{"is_even(s.index(i))"}});
  // Function applications win over arithmetic.
  CHECK(groups_of(infer("forall|i: int| f(i) > i * i + i * i")) == std::vector<std::vector<std::string>>{{"f(i)"}});
  // No single covering candidate: smallest multi-expression set.
  CHECK(groups_of(infer("forall|x: int, y: int| f(x) <= g(y)")) ==
        std::vector<std::vector<std::string>>{{"f(x)", "g(y)"}});
  CHECK(groups_of(infer("forall|x: int| f(x) == g(x)")) == groups_of(infer("forall|x: int| f(x) == g(x)")));
}

TEST_CASE("all_triggers keeps incomparable candidates") {
  CHECK(groups_of(infer("forall|x: int| f(x) == g(x)", TriggerStrategy::AllTriggers)) ==
        std::vector<std::vector<std::string>>{{"f(x)"}, {"g(x)"}});
}

TEST_CASE("all_triggers falls back when a binder mixes arithmetic and calls") {
  TriggerSelection sel = infer("forall|i: int| f(i + 1) == g(i)", TriggerStrategy::AllTriggers);
  CHECK(sel.strategy_used == TriggerSource::Conservative);
  CHECK(sel.groups.size() == 1);
}

TEST_CASE("trigger errors") {
  CHECK_THROWS_AS(infer("forall|x: int| x == x"), TriggerError);
  CHECK_THROWS_AS(infer("forall|x: int, y: int| #[trigger] f(x) == g(x, y)"), TriggerError);
  CHECK_THROWS_AS(infer("forall|x: int| #[trigger] (x < 3)"), TriggerError);
  // A bare variable is never a trigger.
  CHECK_THROWS_AS(infer("forall|x: int| f(#[trigger] x)"), TriggerError);
}

TEST_CASE("matching loop warning") {
  CHECK(!infer("forall|x: int| #[trigger] f(x) == f(f(x))").warnings.empty());
  CHECK(infer("forall|x: int| #[trigger] f(x) == g(x)").warnings.empty());
}

TEST_CASE("annotate requires triggers only where quantifiers are universal") {
  Expr goal = parse_expr("forall|x: int| x == x");
  CHECK_NOTHROW(annotate_triggers(goal, TriggerStrategy::Conservative, false));
  CHECK_THROWS_AS(annotate_triggers(goal, TriggerStrategy::Conservative, true), TriggerError);
  Expr ex = parse_expr("exists|x: int| x == x");
  CHECK_NOTHROW(annotate_triggers(ex, TriggerStrategy::Conservative, true));
  Expr imp = parse_expr("(forall|x: int| f(x) > 0) ==> g(1) > 0");
  annotate_triggers(imp, TriggerStrategy::Conservative, false);
  CHECK(imp.lhs().triggers.size() == 1);
}

TEST_CASE("property: coverage and non-redundancy on generated quantifiers") {
  std::mt19937 rng(7);
  const char* vars[] = {"x", "y", "z"};
  const char* fns[] = {"f", "g", "h"};
  std::function<std::string(int)> term = [&](int depth) -> std::string {
    int pick = static_cast<int>(rng() % (depth > 0 ? 5 : 2));
    switch (pick) {
      case 0: return vars[rng() % 3];
      case 1: return std::to_string(rng() % 3);
      case 2: return std::string(fns[rng() % 3]) + "(" + term(depth - 1) + ")";
      case 3: return std::string(fns[rng() % 3]) + "(" + term(depth - 1) + ", " + term(depth - 1) + ")";
      default: return "(" + term(depth - 1) + (rng() % 2 ? " + " : " * ") + term(depth - 1) + ")";
    }
  };
  int checked = 0;
  for (int iter = 0; iter < 400; ++iter) {
    std::string body = term(3) + " == " + term(3);
    Expr b = parse_expr(body);
    std::set<std::string> used;
    collect_vars(b, used);
    if (used.empty()) continue;
    std::string binders;
    for (const auto& v : used) binders += (binders.empty() ? "" : ", ") + v + ": int";
    Expr q = parse_expr("forall|" + binders + "| " + body);
    for (auto s : {TriggerStrategy::Conservative, TriggerStrategy::AllTriggers}) {
      TriggerSelection sel;
      try {
        sel = infer_triggers(q.binders, q.body(), s, false, q.span);
      } catch (const TriggerError&) {
        continue;
      }
      ++checked;
      INFO(body);
      REQUIRE(!sel.groups.empty());
      for (const auto& g : sel.groups) {
        std::set<std::string> mentioned;
        for (const auto& e : g.exprs) collect_vars(e, mentioned);
        for (const auto& v : used) CHECK(mentioned.count(v));
      }
      for (std::size_t i = 0; i < sel.groups.size(); ++i)
        for (std::size_t j = 0; j < sel.groups.size(); ++j) {
          if (i == j) continue;
          bool below = true;
          for (const auto& eb : sel.groups[j].exprs) {
            bool found = false;
            for (const auto& ea : sel.groups[i].exprs) found = found || is_subterm(eb, ea);
            below = below && found;
          }
          CHECK(!below);
        }
      // Determinism.
      TriggerSelection again = infer_triggers(q.binders, q.body(), s, false, q.span);
      CHECK(groups_of(again) == groups_of(sel));
    }
  }
  CHECK(checked > 300);
}
