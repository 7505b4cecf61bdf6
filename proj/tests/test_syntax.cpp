#include <doctest.h>

#include "tunav/syntax.hpp"

using namespace tunav;

namespace {

const char* kPushContains = R"(
proof fn push_contains(a: Seq<int>) { let b = a.push(3); assert(b.contains(3)); }
)";

std::set<SourceSpan> all_assert_spans(const std::vector<Stmt>& stmts) {
  std::set<SourceSpan> out;
  for (const auto& s : stmts)
    if (s.kind == StmtKind::Assert || s.kind == StmtKind::AssertBy) out.insert(s.span);
  return out;
}

}  // namespace

TEST_CASE("parse push_contains") {
  ProgramAst p = parse_module(kPushContains, "t.tv");
  REQUIRE(p.decls.size() == 1);
  const Decl& d = p.decls[0];
  CHECK(d.kind == DeclKind::ProofFn);
  CHECK(d.name == "push_contains");
  REQUIRE(d.body.size() == 2);
  CHECK(d.body[0].kind == StmtKind::Let);
  CHECK(d.body[1].kind == StmtKind::Assert);
  // The assert span covers the `assert` keyword through the semicolon.
  std::string src = kPushContains;
  const SourceSpan& sp = d.body[1].span;
  CHECK(src.substr(sp.start_offset, sp.end_offset - sp.start_offset) == "assert(b.contains(3));");
  CHECK(sp.line == 2);
}

TEST_CASE("empty file has no declarations") {
  ProgramAst p = parse_module("", "empty.tv");
  CHECK(p.decls.empty());
  CHECK(p.module_name == "empty");
}

TEST_CASE("broadcast group members") {
  ProgramAst p = parse_module("broadcast group g { m::a, m::b }", "g.tv");
  REQUIRE(p.decls.size() == 1);
  CHECK(p.decls[0].kind == DeclKind::BroadcastGroup);
  CHECK(p.decls[0].paths == std::vector<std::string>{"m::a", "m::b"});
}

TEST_CASE("module header") {
  ProgramAst p = parse_module("module prelude::seq;\nsort Seq<A>;", "x.tv");
  CHECK(p.module_name == "prelude::seq");
  REQUIRE(p.decls.size() == 1);
  CHECK(p.decls[0].type_params == std::vector<std::string>{"A"});
}

TEST_CASE("method sugar desugars to calls") {
  Expr a = parse_expr("a.push(3).contains(3)");
  Expr b = parse_expr("contains(push(a, 3), 3)");
  CHECK(structurally_equal(a, b));
  CHECK(a.kind == ExprKind::Call);
  CHECK(a.name == "contains");
  CHECK(a.args[0].name == "push");
}

TEST_CASE("chained comparisons") {
  Expr a = parse_expr("0 <= i < s.len()");
  Expr b = parse_expr("0 <= i && i < s.len()");
  CHECK(structurally_equal(a, b));
}

TEST_CASE("precedence of implication and iff") {
  Expr e = parse_expr("a ==> b ==> c <==> d || e && f");
  REQUIRE(e.kind == ExprKind::Binary);
  CHECK(e.op == BinaryOp::Iff);
  CHECK(e.lhs().op == BinaryOp::Implies);
  CHECK(e.lhs().rhs().op == BinaryOp::Implies);
  CHECK(e.rhs().op == BinaryOp::Or);
  CHECK(e.rhs().rhs().op == BinaryOp::And);
}

TEST_CASE("trigger marks and all_triggers") {
  Expr e = parse_expr("forall|i: int| 0 <= i < s.len() ==> #[trigger] is_even(s.index(i))");
  REQUIRE(e.kind == ExprKind::Forall);
  const Expr& rhs = e.body().rhs();
  CHECK(rhs.trigger_mark);
  CHECK(rhs.name == "is_even");
  Expr q = parse_expr("forall|x: int| #![all_triggers] f(x) == g(x)");
  CHECK(q.all_triggers);
}

TEST_CASE("casts are transparent") {
  CHECK(structurally_equal(parse_expr("divides(n as int, k)"), parse_expr("divides(n, k)")));
}

TEST_CASE("parse errors carry spans") {
  try {
    parse_module("proof fn f( { }", "bad.tv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.span().line == 1);
    CHECK(std::string(e.what()).find("expected identifier") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_module("spec fn f(x: int) -> int { x + }", "bad.tv"), ParseError);
  CHECK_THROWS_AS(parse_module("broadcast spec fn f() -> int;", "bad.tv"), ParseError);
}

TEST_CASE("render_without_sites removes asserts") {
  const char* src = R"(
proof fn f(x: int) requires x > 0, ensures x > -1 {
    assert(x > 0);
    assert(x >= 1) by {
        assert(x != 0);
    }
    let y = x + 1;
}
)";
  ProgramAst p = parse_module(src, "r.tv");
  const Decl& d = p.decls[0];

  SUBCASE("remove all") {
    std::string out = render_without_sites(p, all_assert_spans(d.body));
    CHECK(out.find("assert") == std::string::npos);
    ProgramAst q = parse_module(out, "r.tv");
    CHECK(q.decls[0].body.size() == 1);
  }
  SUBCASE("remove assert-by deletes its block") {
    std::string out = render_without_sites(p, {d.body[1].span});
    CHECK(out.find("x != 0") == std::string::npos);
    CHECK(out.find("x > 0);") != std::string::npos);
  }
  SUBCASE("remove nothing round-trips") {
    ProgramAst q = parse_module(render_without_sites(p, {}), "r.tv");
    CHECK(structurally_equal(p, q));
  }
  SUBCASE("non-site span is rejected") {
    CHECK_THROWS_AS(render_without_sites(p, {d.body[2].span}), std::invalid_argument);
  }
}

TEST_CASE("render round-trips tricky expressions") {
  const char* exprs[] = {
      "(a + b) * c - (d - e)",
      "-(3) + -x",
      "(-3).f()",
      "#[trigger] (i + 1) == f(i)",
      "(forall|x: int| f(x)) && g(y)",
      "a ==> (b ==> c)",
      "(a ==> b) ==> c",
      "(a == b) == c",
      "if a < b { a } else { if c { b } else { 0 } }",
      "!(a && b) || !c",
      "exists|i: int, j: nat| #![all_triggers] s.index(i) == j",
      "m::c() + 1",
      "x % 2 == 0 <==> y / 3 > 1",
  };
  for (const char* s : exprs) {
    Expr e = parse_expr(s);
    std::string r = render_expr(e);
    INFO(s << "  =>  " << r);
    CHECK(structurally_equal(e, parse_expr(r)));
  }
}
