#include <doctest.h>

#include "tunav/driver.hpp"
#include "tunav/prelude.hpp"

using namespace tunav;

namespace {

RunReport run(const std::string& src, RunOptions opts = {}) {
  return run_verification(load_workspace({{"user.tv", src}}), opts);
}

}  // namespace

TEST_CASE("prelude lemmas verify") {
  RunOptions opts;
  opts.prelude_only = true;
  auto report = run_verification(load_workspace({}), opts);
  CHECK(!report.functions.empty());
  for (const auto& f : report.functions) {
    INFO(render_run(RunReport{{f}, {}, {}, 0}, false, false));
    CHECK(f.status == Status::Verified);
  }
}

TEST_CASE("push_contains walkthrough") {
  auto src = [](const std::string& use) {
    return "pub proof fn push_contains(a: Seq<int>) {\n" + use + "  let b = a.push(3);\n  assert(b.contains(3));\n}\n";
  };
  RunOptions opts;
  {
    auto r = run(src(""), opts);
    REQUIRE(r.functions.size() == 1);
    CHECK(r.functions[0].status == Status::Failed);
  }
  {
    auto r = run(src("  broadcast use {prelude::seq::group_seq_properties};\n"), opts);
    REQUIRE(r.functions.size() == 1);
    CHECK(r.functions[0].status == Status::Verified);
    CHECK(usage_report(r.functions[0]) ==
          "checking this function used these broadcasted lemmas and broadcast groups:\n"
          "        - (group) prelude::seq::group_seq_properties,\n"
          "        - prelude::seq::lemma_seq_contains_after_push\n");
  }
  {
    auto r = run(src("  broadcast use {lemma_seq_contains_after_push};\n"), opts);
    REQUIRE(r.functions.size() == 1);
    CHECK(r.functions[0].status == Status::Verified);
    CHECK(usage_report(r.functions[0]) ==
          "checking this function used these broadcasted lemmas and broadcast groups:\n"
          "        - prelude::seq::lemma_seq_contains_after_push\n");
  }
}

TEST_CASE("trigger sensitivity walkthrough") {
  auto src = [](const std::string& quant) {
    return "spec fn is_even(i: int) -> bool { i % 2 == 0 }\n"
           "proof fn seq_trigger_example(s: Seq<int>)\n"
           "    requires\n"
           "        5 <= s.len(),\n"
           "        " + quant + ",\n"
           "{\n"
           "    assert(s.index(3) % 2 == 0);\n"
           "}\n";
  };
  auto status = [&](const std::string& q) { return run(src(q)).functions.at(0).status; };
  CHECK(status("forall|i: int| 0 <= i < s.len() ==> #[trigger] is_even(s.index(i))") == Status::Failed);
  CHECK(status("forall|i: int| 0 <= i < s.len() ==> is_even(#[trigger] s.index(i))") == Status::Verified);
  CHECK(status("forall|i: int| #![all_triggers] 0 <= i < s.len() ==> is_even(s.index(i))") == Status::Verified);
  auto failed = run(src("forall|i: int| 0 <= i < s.len() ==> #[trigger] is_even(s.index(i))"));
  REQUIRE(failed.functions[0].obligations.size() == 1);
  CHECK(failed.functions[0].obligations[0].span.line == 7);
}

TEST_CASE("implicit context walkthrough") {
  const char* src =
      "proof fn seq_axiom_usage(s1: Seq<nat>, s2: Seq<nat>)\n"
      "  requires s1.len() > 10 && s2.len() > 20\n"
      "  ensures s1.add(s2).len() > 30 { }\n";
  RunOptions opts;
  CHECK(run(src, opts).functions.at(0).status == Status::Verified);
  opts.default_prelude = false;
  CHECK(run(src, opts).functions.at(0).status == Status::Failed);
}

TEST_CASE("usage refinement keeps fact indices aligned after a drop") {
  const char* src =
      "spec fn grow(x: int) -> int;\n"
      "pub broadcast axiom fn axiom_grow(x: int) ensures #[trigger] grow(x) > x, ;\n"
      "proof fn grow_then_push(s: Seq<int>, x: int)\n"
      "  requires s.len() == 0,\n"
      "  ensures s.push(grow(x)).index(0) > x,\n"
      "{ broadcast use axiom_grow; }\n";
  auto r = run(src);
  const FunctionReport* f = r.find("user::grow_then_push");
  REQUIRE(f);
  REQUIRE(f->status == Status::Verified);
  // push_index_diff is instantiated but droppable; the survivors must be the
  // facts actually needed, not whatever sits at their old indices.
  CHECK(f->used_facts == std::set<std::string>{"user::axiom_grow", "prelude::seq::axiom_seq_push_index_same"});
}
