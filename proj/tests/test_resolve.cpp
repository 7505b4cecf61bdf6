#include <doctest.h>

#include "tunav/resolve.hpp"

using namespace tunav;

namespace {

Program resolve_sources(const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<ProgramAst> asts;
  for (const auto& [name, src] : files) asts.push_back(parse_module(src, name));
  return resolve_program(asts);
}

const char* kSeqModule = R"(
module seqlib;
sort Seq<A>;
spec fn len<A>(s: Seq<A>) -> int;
spec fn index<A>(s: Seq<A>, i: int) -> A;
spec fn push<A>(s: Seq<A>, v: A) -> Seq<A>;
spec fn contains<A>(s: Seq<A>, v: A) -> bool;
broadcast axiom fn push_len<A>(s: Seq<A>, v: A) ensures #[trigger] s.push(v).len() == s.len() + 1, ;
broadcast proof fn lemma_seq_contains_after_push<A>(s: Seq<A>, v: A)
    ensures #[trigger] s.push(v).contains(v),
{ }
proof fn plain_lemma(x: int) ensures x == x, { }
broadcast group group_seq_properties { lemma_seq_contains_after_push }
)";

std::vector<std::string> task_symbols(const TaskOrder& o) {
  std::vector<std::string> out;
  for (const auto& t : o.tasks) out.push_back(t.symbol);
  return out;
}

}  // namespace

TEST_CASE("non-broadcast lemma in a use is rejected") {
  try {
    resolve_sources({{"seqlib.tv", kSeqModule},
                     {"user.tv", "proof fn f() { broadcast use seqlib::plain_lemma; }"}});
    FAIL("expected a resolve error");
  } catch (const ResolveError& e) {
    CHECK(std::string(e.what()).find("not a broadcastable fact") != std::string::npos);
  }
}

TEST_CASE("group membership flattens to broadcast lemma instances") {
  Program p = resolve_sources({{"seqlib.tv", kSeqModule}, {"user.tv", "proof fn f(s: Seq<int>) { }"}});
  BroadcastRegistry reg = build_registry(p);
  const auto& members = reg.groups.at("seqlib::group_seq_properties");
  REQUIRE(!members.empty());
  for (int id : members) CHECK(reg.facts[id].path == "seqlib::lemma_seq_contains_after_push");
  CHECK(p.by_symbol.count("seqlib::lemma_seq_contains_after_push<int>"));
  // Flattening a group twice, or a group plus its members, is idempotent.
  auto once = reg.flatten(p, {"seqlib::group_seq_properties"});
  auto twice = reg.flatten(p, {"seqlib::group_seq_properties", "seqlib::group_seq_properties",
                               "seqlib::lemma_seq_contains_after_push"});
  CHECK(once == twice);
}

TEST_CASE("duplicate definitions across files of one module") {
  CHECK_THROWS_AS(resolve_sources({{"a.tv", "module m; spec fn f() -> int;"}, {"b.tv", "module m; spec fn f() -> int;"}}),
                  ResolveError);
  // Same name in different modules is fine.
  CHECK_NOTHROW(resolve_sources({{"a.tv", "module m1; spec fn f() -> int;"}, {"b.tv", "module m2; spec fn f() -> int;"}}));
}

TEST_CASE("type errors") {
  CHECK_THROWS_AS(resolve_sources({{"t.tv", "proof fn f(x: int) { assert(x && true); }"}}), ResolveError);
  CHECK_THROWS_AS(resolve_sources({{"t.tv", "spec fn g(x: int) -> int; proof fn f() { assert(g(1, 2) == 0); }"}}),
                  ResolveError);
  CHECK_THROWS_AS(resolve_sources({{"t.tv", "proof fn f() { assert(y == 0); }"}}), ResolveError);
  CHECK_THROWS_AS(resolve_sources({{"t.tv", "proof fn f(x: int) { let x = 1; }"}}), ResolveError);
  CHECK_NOTHROW(resolve_sources({{"t.tv", "proof fn f(x: nat) { let y: int = x + 1; assert(y > 0); }"}}));
}

TEST_CASE("constants resolve to nullary calls") {
  Program p = resolve_sources({{"t.tv", "const c: int; proof fn f() { assert(c + 1 > c); }"}});
  const FnInstance& f = p.fn("t::f");
  const Expr& e = f.stmts[0].expr;
  CHECK(e.lhs().lhs().kind == ExprKind::Call);
  CHECK(e.lhs().lhs().symbol == "t::c");
}

TEST_CASE("recursive proof functions are rejected") {
  CHECK_THROWS_AS(resolve_sources({{"t.tv", "proof fn a(x: int) { b(x); } proof fn b(x: int) { a(x); }"}}),
                  ResolveError);
}

TEST_CASE("task order respects broadcast dependencies") {
  SUBCASE("used lemma is proven first") {
    Program p = resolve_sources({{"t.tv", R"(
spec fn f(x: int) -> int;
proof fn F(x: int) { broadcast use L; assert(f(x) > 0); }
broadcast axiom fn A(x: int) ensures f(x) > -1, ;
broadcast proof fn L(x: int) ensures #[trigger] f(x) > 0, { }
)"}});
    TaskOrder o = order_tasks(p, build_registry(p));
    CHECK(task_symbols(o) == std::vector<std::string>{"t::L", "t::F"});
    CHECK(o.tasks[1].depends_on == std::vector<std::size_t>{0});
    CHECK(o.layer_count == 2);
  }
  SUBCASE("no uses keeps source order") {
    Program p = resolve_sources({{"t.tv", "proof fn c() { } proof fn a() { } proof fn b() { }"}});
    TaskOrder o = order_tasks(p, build_registry(p));
    CHECK(task_symbols(o) == std::vector<std::string>{"t::c", "t::a", "t::b"});
    CHECK(o.layer_count == 1);
  }
  SUBCASE("mutual imports form a cycle") {
    Program p = resolve_sources({{"t.tv", R"(
spec fn f(x: int) -> bool;
broadcast proof fn A(x: int) ensures #[trigger] f(x), { broadcast use B; }
broadcast proof fn B(x: int) ensures #[trigger] f(x + 1), { broadcast use A; }
)"}});
    try {
      order_tasks(p, build_registry(p));
      FAIL("expected a cycle");
    } catch (const CycleError& e) {
      CHECK(e.members() == std::vector<std::string>{"t::A", "t::B"});
    }
  }
}

TEST_CASE("strongly connected components") {
  std::vector<std::vector<std::size_t>> g{{1}, {2}, {0}, {2}, {}};
  auto sccs = strongly_connected_components(g);
  std::set<std::vector<std::size_t>> got(sccs.begin(), sccs.end());
  CHECK(got == std::set<std::vector<std::size_t>>{{0, 1, 2}, {3}, {4}});
}
