#include <doctest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "random_programs.hpp"
#include "tunav/engine.hpp"

using namespace tunav;
using namespace tunav::testing;

namespace {

const char* kLib = R"(
module seqlib;
sort Seq<A>;
spec fn len<A>(s: Seq<A>) -> int;
spec fn push<A>(s: Seq<A>, v: A) -> Seq<A>;
spec fn add<A>(s1: Seq<A>, s2: Seq<A>) -> Seq<A>;
spec fn index<A>(s: Seq<A>, i: int) -> A;
spec fn contains<A>(s: Seq<A>, v: A) -> bool;
broadcast axiom fn axiom_seq_add_len<A>(s1: Seq<A>, s2: Seq<A>)
    ensures #[trigger] s1.add(s2).len() == s1.len() + s2.len(), ;
axiom fn axiom_len_pairs<A>(s1: Seq<A>, s2: Seq<A>)
    ensures s1.add(s2).len() == (#[trigger] s1.len()) + (#[trigger] s2.len()), ;
broadcast proof fn lemma_seq_contains_after_push<A>(s: Seq<A>, v: A, x: A)
    ensures (#[trigger] s.push(v).contains(x)) <==> v == x || s.contains(x),
{ }
)";

struct Fixture {
  std::vector<ProgramAst> asts;
  Program program;
  BroadcastRegistry registry;

  explicit Fixture(const std::string& user) {
    asts.push_back(parse_module(kLib, "seqlib.tv"));
    asts.push_back(parse_module(user, "user.tv"));
    program = resolve_program(asts);
    registry = build_registry(program);
  }

  std::vector<Obligation> obligations(const std::string& fn, VcConfig cfg = {}) {
    VcGenerator gen(program, registry, cfg);
    return gen.generate(program.fn(fn));
  }

  Outcome prove_last(const std::string& fn, VcConfig cfg = {}, Limits limits = {}) {
    auto obs = obligations(fn, cfg);
    REQUIRE(!obs.empty());
    return prove(obs.back(), limits);
  }
};

LinearConstraint lc(std::map<std::int64_t, std::int64_t> terms, std::int64_t k, bool eq = false) {
  return LinearConstraint{std::move(terms), k, eq};
}

}  // namespace

TEST_CASE("arithmetic consistency") {
  // x > 10, y > 20, z == x + y, z <= 30
  std::vector<LinearConstraint> cs{lc({{1, -1}}, 11), lc({{2, -1}}, 21), lc({{3, 1}, {1, -1}, {2, -1}}, 0, true),
                                   lc({{3, 1}}, -30)};
  CHECK(arith_consistent(cs) == ArithResult::Inconsistent);
  CHECK(arith_consistent({}) == ArithResult::Consistent);
  CHECK(arith_consistent({lc({{1, 2}}, -1, true)}) == ArithResult::Inconsistent);
  // 1 <= 2x <= 1 has no integer solution either.
  CHECK(arith_consistent({lc({{1, 2}}, -1), lc({{1, -2}}, 1)}) == ArithResult::Inconsistent);
  // 0 <= x <= 3 is fine.
  CHECK(arith_consistent({lc({{1, -1}}, 0), lc({{1, 1}}, -3)}) == ArithResult::Consistent);
}

TEST_CASE("arithmetic agrees with brute force on small systems") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-3, 3), konst(-6, 6), count(1, 4), kind(0, 3);
  int checked = 0;
  for (int iter = 0; iter < 400; ++iter) {
    std::vector<LinearConstraint> cs;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      LinearConstraint c;
      for (int v = 0; v < 2; ++v)
        if (int k = coef(rng)) c.terms[v] = k;
      c.constant = konst(rng);
      c.equality = kind(rng) == 0;
      cs.push_back(c);
    }
    // Coefficients and constants are small, so any solution lies in [-12, 12].
    bool sat = false;
    for (int x = -12; x <= 12 && !sat; ++x)
      for (int y = -12; y <= 12 && !sat; ++y) {
        bool ok = true;
        for (const auto& c : cs) {
          std::int64_t s = c.constant;
          for (const auto& [v, k] : c.terms) s += k * (v == 0 ? x : y);
          ok = ok && (c.equality ? s == 0 : s <= 0);
        }
        sat = ok;
      }
    ArithResult r = arith_consistent(cs);
    if (sat) CHECK(r != ArithResult::Inconsistent);
    if (r == ArithResult::Inconsistent) CHECK(!sat);
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("implied equalities") {
  // x <= y, y <= x  ->  x == y ; z == 4
  auto ie = implied_equalities({lc({{1, 1}, {2, -1}}, 0), lc({{1, -1}, {2, 1}}, 0), lc({{3, 1}}, -4, true)});
  CHECK(!ie.inconsistent);
  REQUIRE(ie.equal_groups.size() == 1);
  CHECK(ie.equal_groups[0] == std::vector<std::int64_t>{1, 2});
  CHECK(ie.fixed.at(3) == 4);
}

TEST_CASE("e-matching follows trigger choice") {
  Fixture fx(R"(
spec fn is_even(x: int) -> bool;
proof fn lemma_all_even(s: Seq<int>, i: int)
    requires 0 <= i < s.len(),
    ensures is_even(#[trigger] s.index(i)),
{ }
proof fn lemma_all_even_strict(s: Seq<int>, i: int)
    requires 0 <= i < s.len(),
    ensures #[trigger] is_even(s.index(i)),
{ }
proof fn t(s: Seq<int>) { assert(s.index(3) == 7); }
)");
  auto obs = fx.obligations("user::t");
  REQUIRE(!obs.empty());
  auto loose = lower_quantified_fact(fx.program.fn("user::lemma_all_even"), TriggerStrategy::Conservative);
  auto strict = lower_quantified_fact(fx.program.fn("user::lemma_all_even_strict"), TriggerStrategy::Conservative);

  SUBCASE("empty graph") {
    Prover p;
    auto a = p.add_fact(loose);
    CHECK(p.ematch(a, 0).empty());
  }
  SUBCASE("matching s.index(i)") {
    Prover p;
    p.assert_ground(obs.back().goal);
    auto a = p.add_fact(loose);
    auto b = p.add_fact(strict);
    auto m = p.ematch(a, 0);
    REQUIRE(m.size() == 1);
    CHECK(m[0].at("i") == "3");
    CHECK(m[0].at("s") == "s");
    CHECK(p.ematch(b, 0).empty());
    CHECK(p.instantiate_round() == 1);
    // Already logged: no repeat.
    CHECK(p.ematch(a, 0).empty());
  }
}

TEST_CASE("instantiation rounds") {
  Fixture fx(R"(
proof fn t(a: Seq<int>, b: Seq<int>, c: Seq<int>) { assert(a.add(b).len() + c.len() >= 0); }
)");
  auto obs = fx.obligations("user::t");
  REQUIRE(!obs.empty());

  SUBCASE("single trigger yields one instance") {
    Prover p;
    p.assert_ground(obs.back().goal);
    p.add_fact(lower_quantified_fact(fx.program.fn("seqlib::axiom_seq_add_len<int>"), TriggerStrategy::Conservative));
    CHECK(p.instantiate_round() == 1);
  }
  SUBCASE("pair trigger yields k squared instances") {
    Prover p;
    p.assert_ground(obs.back().goal);
    auto f = lower_quantified_fact(fx.program.fn("seqlib::axiom_len_pairs<int>"), TriggerStrategy::Conservative);
    REQUIRE(f.triggers.size() == 1);
    REQUIRE(f.triggers[0].size() == 2);
    p.add_fact(f);
    // Distinct .len() terms: a.add(b).len() and c.len(), so k = 2.
    CHECK(p.instantiate_round() == 4);
  }
  SUBCASE("no facts") {
    Prover p;
    p.assert_ground(obs.back().goal);
    CHECK(p.instantiate_round() == 0);
  }
}

TEST_CASE("prove: broadcast imports decide push_contains") {
  const char* body = R"(
proof fn push_contains(s: Seq<int>, v: int, x: int)
    requires s.contains(x),
    ensures s.push(v).contains(x),
{ %USE% }
)";
  auto src = [&](const std::string& use) {
    std::string s = body;
    return s.replace(s.find("%USE%"), 5, use);
  };
  {
    Fixture fx(src(""));
    auto out = fx.prove_last("user::push_contains");
    CHECK(out.status == Status::Failed);
  }
  {
    Fixture fx(src("broadcast use seqlib::lemma_seq_contains_after_push;"));
    auto out = fx.prove_last("user::push_contains");
    CHECK(out.status == Status::Verified);
    bool found = false;
    for (const auto& o : out.used_core)
      if (o.path == "seqlib::lemma_seq_contains_after_push") found = true;
    CHECK(found);
  }
}

TEST_CASE("prove: arithmetic through an axiom instance") {
  Fixture fx(R"(
proof fn t(s1: Seq<int>, s2: Seq<int>)
    requires s1.len() > 10, s2.len() > 20,
{
    broadcast use seqlib::axiom_seq_add_len;
    assert(s1.add(s2).len() > 30);
}
)");
  auto out = fx.prove_last("user::t");
  CHECK(out.status == Status::Verified);
  CHECK(out.metrics.instantiations >= 1);
}

TEST_CASE("prove: trivial outcomes") {
  Fixture fx(R"(
proof fn bad() { assert(1 == 2); }
proof fn good(x: int) requires x > 3, { assert(x >= 4); assert(x != 3); }
proof fn modular(x: int) { assert((2 * x) % 2 == 0); assert(x % 3 < 3); }
)");
  CHECK(fx.prove_last("user::bad").status == Status::Failed);
  for (const auto& ob : fx.obligations("user::good")) CHECK(prove(ob, {}).status == Status::Verified);
  for (const auto& ob : fx.obligations("user::modular")) CHECK(prove(ob, {}).status == Status::Verified);
}

TEST_CASE("prove: matching loop terminates with unknown") {
  Fixture fx(R"(
spec fn f(x: int) -> int;
spec fn g(x: int) -> int;
broadcast proof fn lemma_loop(x: int) ensures f(f(x)) == f(#[trigger] f(x)) + 0 * g(x), { }
proof fn t() {
    broadcast use lemma_loop;
    assert(f(0) == 1);
}
)");
  Limits limits;
  auto start = std::chrono::steady_clock::now();
  auto out = fx.prove_last("user::t", {}, limits);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(out.status == Status::Unknown);
  CHECK(out.reason == UnknownReason::Rounds);
  CHECK(out.metrics.rounds <= limits.max_rounds);
  CHECK(out.metrics.instantiations <= limits.max_instantiations);
  CHECK(secs < 5.0);
}

TEST_CASE("prove: fuel controls unfolding depth") {
  Fixture fx(R"(
spec fn fact(n: nat) -> nat { if n == 0 { 1 } else { n * fact((n - 1) as nat) } }
proof fn t() { assert(fact(1) == 1); }
)");
  VcConfig one;
  one.fuel = 1;
  VcConfig two;
  two.fuel = 2;
  CHECK(fx.prove_last("user::t", one).status == Status::Failed);
  CHECK(fx.prove_last("user::t", two).status == Status::Verified);
}

TEST_CASE("finite evaluation") {
  Fixture fx(R"(
proof fn t0() { assert(forall|i: int| 0 <= i < 3 ==> i + 0 < 3); }
proof fn t1() { assert(forall|i: int| 0 <= i < 3 ==> i + 0 < 2); }
proof fn t2() { assert(exists|i: int| 0 <= i < 3 && i * i == 4); }
proof fn t3() { assert(forall|i: int| i + 0 < 2); }
)");
  auto goal = [&](const char* fn) { return fx.obligations(fn).back().goal; };
  CHECK(eval_finite(goal("user::t0"), {}));
  CHECK(!eval_finite(goal("user::t1"), {}));
  CHECK(eval_finite(goal("user::t2"), {}));
  CHECK_THROWS_AS(eval_finite(goal("user::t3"), {}), std::domain_error);
}

TEST_CASE("soundness against the finite oracle") {
  SoundnessTally t = run_soundness_suite(1000, 16);
  for (const auto& src : t.violations) FAIL_CHECK("unsound verdict for:\n" << src);
  MESSAGE("verified=" << t.verified << " failed=" << t.failed << " unknown=" << t.unknown);
  CHECK(t.verified >= 150);
  CHECK(t.failed >= 150);
}
