#include <doctest.h>

#include "tunav/vcgen.hpp"

using namespace tunav;

namespace {

const char* kSeq = R"(
module seqlib;
sort Seq<A>;
spec fn len<A>(s: Seq<A>) -> int;
spec fn push<A>(s: Seq<A>, v: A) -> Seq<A>;
spec fn add<A>(s1: Seq<A>, s2: Seq<A>) -> Seq<A>;
spec fn contains<A>(s: Seq<A>, v: A) -> bool;
broadcast axiom fn axiom_seq_add_len<A>(s1: Seq<A>, s2: Seq<A>)
    ensures #[trigger] s1.add(s2).len() == s1.len() + s2.len(), ;
broadcast proof fn lemma_seq_contains_after_push<A>(s: Seq<A>, v: A, x: A)
    ensures (#[trigger] s.push(v).contains(x)) <==> v == x || s.contains(x),
{ }
broadcast proof fn lemma_pos(a: int) requires a > 0, ensures #[trigger] pos(a), { }
spec fn pos(a: int) -> bool;
broadcast group group_seq_properties { lemma_seq_contains_after_push }
)";

struct Fixture {
  std::vector<ProgramAst> asts;
  Program program;
  BroadcastRegistry registry;

  explicit Fixture(const std::string& user) {
    asts.push_back(parse_module(kSeq, "seqlib.tv"));
    asts.push_back(parse_module(user, "user.tv"));
    program = resolve_program(asts);
    registry = build_registry(program);
  }

  std::vector<Obligation> obligations(const std::string& fn, VcConfig cfg = {}) {
    VcGenerator gen(program, registry, cfg);
    return gen.generate(program.fn(fn));
  }
};

const QuantifiedFact* find_fact(const FactContext& ctx, const std::string& path) {
  for (const auto& f : ctx.quantified)
    if (f->origin.path == path) return f.get();
  return nullptr;
}

}  // namespace

TEST_CASE("lowering broadcast lemmas") {
  Fixture fx("proof fn f() { }");
  const FnInstance& lemma = fx.program.fn("seqlib::lemma_seq_contains_after_push<int>");
  QuantifiedFact q = lower_quantified_fact(lemma, TriggerStrategy::Conservative);
  REQUIRE(q.binders.size() == 3);
  REQUIRE(q.triggers.size() == 1);
  CHECK(render_expr(q.triggers[0][0]) == "s.push(v).contains(x)");
  CHECK(q.origin.kind == OriginKind::BroadcastLemma);

  QuantifiedFact add = lower_quantified_fact(fx.program.fn("seqlib::axiom_seq_add_len<int>"),
                                             TriggerStrategy::Conservative);
  CHECK(add.origin.kind == OriginKind::Axiom);
  CHECK(render_expr(add.triggers[0][0]) == "s1.add(s2).len()");

  QuantifiedFact pos = lower_quantified_fact(fx.program.fn("seqlib::lemma_pos"), TriggerStrategy::Conservative);
  CHECK(render_expr(pos.formula()) == "forall|a: int| a > 0 ==> #[trigger] pos(a)");
}

TEST_CASE("obligation counts and order") {
  Fixture fx(R"(
proof fn callee(a: int, b: int) requires a > 0, b > 0, ensures a + b > 0, { }
proof fn f(x: int) ensures x == x, {
    assert(x == x);
    assert(x + 1 > x) by { assert(1 > 0); }
    callee(1, 2);
    assert(3 > 0);
}
)");
  auto obs = fx.obligations("user::f");
  REQUIRE(obs.size() == 7);
  CHECK(obs[0].site.kind == SiteKind::Assert);
  CHECK(render_expr(obs[1].goal) == "1 > 0");
  CHECK(render_expr(obs[2].goal) == "x + 1 > x");
  CHECK(obs[3].site.kind == SiteKind::LemmaPrecondition);
  CHECK(render_expr(obs[3].goal) == "1 > 0");
  CHECK(render_expr(obs[4].goal) == "2 > 0");
  CHECK(obs[6].site.kind == SiteKind::Ensures);
  // The call's postcondition, instantiated at the arguments, is available afterwards.
  bool found = false;
  for (const auto& g : obs[5].context.ground) found = found || render_expr(g.expr) == "1 + 2 > 0";
  CHECK(found);
  // The block's inner assert does not leak; its head does.
  for (const auto& g : obs[5].context.ground) CHECK(render_expr(g.expr) != "1 > 0");
}

TEST_CASE("import scoping") {
  Fixture fx(R"(
proof fn direct(a: Seq<int>) {
    broadcast use {seqlib::lemma_seq_contains_after_push};
    assert(a.push(3).contains(3));
}
proof fn via_group(a: Seq<int>) {
    broadcast use seqlib::group_seq_properties;
    assert(a.push(3).contains(3));
}
proof fn block(a: Seq<int>) {
    assert(a.push(3).contains(3)) by {
        broadcast use seqlib::group_seq_properties;
    }
    assert(true);
}
)");
  auto d = fx.obligations("user::direct");
  const QuantifiedFact* f = find_fact(d[0].context, "seqlib::lemma_seq_contains_after_push");
  REQUIRE(f);
  CHECK(f->groups_via.empty());
  auto g = fx.obligations("user::via_group");
  f = find_fact(g[0].context, "seqlib::lemma_seq_contains_after_push");
  REQUIRE(f);
  CHECK(f->groups_via == std::vector<std::string>{"seqlib::group_seq_properties"});
  auto b = fx.obligations("user::block");
  REQUIRE(b.size() == 2);
  CHECK(find_fact(b[0].context, "seqlib::lemma_seq_contains_after_push"));
  CHECK(!find_fact(b[1].context, "seqlib::lemma_seq_contains_after_push"));
}

TEST_CASE("definitional axioms") {
  Fixture fx(R"(
spec fn is_even(i: int) -> bool { i % 2 == 0 }
spec fn fact(n: nat) -> nat { if n == 0 { 1 } else { n * fact((n - 1) as nat) } }
spec fn g(n: nat) -> nat;
proof fn f() { assert(is_even(4)); }
proof fn h() { assert(fact(2) == 2); }
)");
  auto is_even = definitional_axiom(fx.program.fn("user::is_even"), 1, {});
  REQUIRE(is_even.size() == 1);
  CHECK(render_expr(is_even[0].formula()) == "forall|i: int| user::is_even(i) <==> i % 2 == 0");
  CHECK(render_expr(is_even[0].triggers[0][0]) == "user::is_even(i)");
  CHECK(definitional_axiom(fx.program.fn("user::is_even"), 0, {}).empty());

  auto fact2 = definitional_axiom(fx.program.fn("user::fact"), 2, {"user::fact"});
  // Definition and layer link per layer.
  REQUIRE(fact2.size() == 4);
  CHECK(fact2[0].conclusion.lhs().symbol == "user::fact");
  CHECK(fact2[1].conclusion.lhs().symbol == "user::fact");
  CHECK(fact2[1].conclusion.rhs().symbol == "user::fact#1");
  CHECK(fact2[2].conclusion.lhs().symbol == "user::fact#1");
  CHECK(fact2[3].conclusion.lhs().symbol == "user::fact#1");
  CHECK(fact2[3].conclusion.rhs().symbol == "user::fact#0");

  auto g = definitional_axiom(fx.program.fn("user::g"), 1, {});
  REQUIRE(g.size() == 1);
  CHECK(render_expr(g[0].formula()) == "forall|n: int| n >= 0 ==> user::g(n) >= 0");

  auto obs = fx.obligations("user::f");
  CHECK(find_fact(obs[0].context, "user::is_even"));
  CHECK(!find_fact(obs[0].context, "user::fact"));
  auto hobs = fx.obligations("user::h", VcConfig{TriggerStrategy::Conservative, 3, true, {}});
  int layers = 0;
  for (const auto& q : hobs[0].context.quantified) layers += q->origin.path == "user::fact";
  CHECK(layers == 6);
}

TEST_CASE("substitution avoids capture") {
  Expr e = parse_expr("forall|y: int| f(y) > x");
  Expr r = substitute_vars(e, {{"x", Expr::var("y")}});
  CHECK(r.binders[0].name != "y");
  CHECK(r.body().rhs().name == "y");
}

TEST_CASE("smtlib output") {
  Fixture fx(R"(
proof fn f(a: Seq<int>) {
    broadcast use seqlib::lemma_seq_contains_after_push;
    assert(a.push(3).contains(3));
}
)");
  auto obs = fx.obligations("user::f");
  std::string s = emit_smtlib(obs[0]);
  CHECK(s.find(":pattern") != std::string::npos);
  CHECK(s.find("(check-sat)") != std::string::npos);
  CHECK(s.find("(declare-sort |seqlib::Seq<int>| 0)") != std::string::npos);
}
