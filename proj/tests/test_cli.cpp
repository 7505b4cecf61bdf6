#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tunav/cli.hpp"
#include "tunav/compare.hpp"
#include "tunav/driver.hpp"

using namespace tunav;
namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "tunav_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

MetricsRow row(const std::string& fn, double ms, long inst) {
  return MetricsRow{fn, "PASS", ms, 1, inst, 1, 3, "conservative"};
}

// Drops every `broadcast use` inside the body, recursively.
void strip_uses(std::vector<Stmt>& stmts) {
  std::erase_if(stmts, [](const Stmt& s) { return s.kind == StmtKind::BroadcastUse; });
  for (auto& s : stmts) strip_uses(s.body);
}

}  // namespace

TEST_CASE("compare: identical metrics give unit ratios") {
  std::vector<MetricsRow> a{row("m::f", 2.0, 10), row("m::g", 4.0, 3)};
  Comparison c = compare_metrics(a, a);
  REQUIRE(c.rows.size() == 2);
  for (const auto& r : c.rows) CHECK(r.ratio == doctest::Approx(1.0));
  CHECK(c.median == doctest::Approx(1.0));
  CHECK(c.p90 == doctest::Approx(1.0));
  CHECK(c.max == doctest::Approx(1.0));
  CHECK(c.over_2x == 0);
}

TEST_CASE("compare: summary statistics") {
  std::vector<MetricsRow> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(row("m::f" + std::to_string(i), 1.0, 1));
    b.push_back(row("m::f" + std::to_string(i), 1.0 + i, 2));
  }
  Comparison c = compare_metrics(a, b);
  // Ratios 1..10; nearest-rank median is 5, p90 is 9.
  CHECK(c.median == doctest::Approx(5.0));
  CHECK(c.p90 == doctest::Approx(9.0));
  CHECK(c.max == doctest::Approx(10.0));
  CHECK(c.over_2x == 8);
  CHECK(c.total_inst_a == 10);
  CHECK(c.total_inst_b == 20);
}

TEST_CASE("compare: mismatched function sets name the symmetric difference") {
  std::vector<MetricsRow> a{row("m::f", 1, 1), row("m::only_a", 1, 1)};
  std::vector<MetricsRow> b{row("m::f", 1, 1), row("m::only_b", 1, 1)};
  try {
    compare_metrics(a, b);
    FAIL("expected a mismatch");
  } catch (const MismatchError& e) {
    std::string msg = e.what();
    CHECK(msg.find("m::only_a") != std::string::npos);
    CHECK(msg.find("m::only_b") != std::string::npos);
    CHECK(msg.find("m::f") == std::string::npos);
  }
}

TEST_CASE("metrics CSV round-trips through the reader") {
  RunReport r = run_verification(
      load_workspace({{"m.tv", "proof fn f(x: int) requires x > 1, ensures x > 0, { }\n"}}), RunOptions{});
  std::ostringstream os;
  write_metrics_csv(r, "conservative", os);
  auto rows = parse_metrics_csv(os.str());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].function == "m::f");
  CHECK(rows[0].status == "PASS");
  CHECK(rows[0].obligations == 1);
  CHECK(rows[0].strategy == "conservative");

  fs::path json = scratch("m.json");
  write_metrics(r, "conservative", json.string());
  auto from_json = read_metrics(json.string());
  REQUIRE(from_json.size() == 1);
  CHECK(from_json[0].function == "m::f");
}

TEST_CASE("cli exit codes") {
  fs::path good = scratch("good.tv"), bad = scratch("bad.tv"), broken = scratch("broken.tv");
  write_text(good, "proof fn f(x: int) requires x > 1, ensures x > 0, { }\n");
  write_text(bad, "proof fn f(x: int) ensures x > 0, { }\n");
  write_text(broken, "proof fn f(x: int) ensures x > 0 {{ }\n");
  CHECK(cli({}) == kExitUsage);
  CHECK(cli({"verify", "--trigger-strategy", "eager", good.string()}) == kExitUsage);
  CHECK(cli({"verify", "--jobs", "0", good.string()}) == kExitUsage);
  CHECK(cli({"verify", scratch("missing.tv").string()}) == kExitUsage);
  CHECK(cli({"verify", good.string()}) == kExitOk);
  CHECK(cli({"verify", bad.string()}) == kExitFailure);
  CHECK(cli({"verify", broken.string()}) == kExitFailure);
  CHECK(cli({"minimize", bad.string()}) == kExitFailure);
  CHECK(cli({"verify", "--help"}) == kExitOk);
  // `--ambient` takes one value per occurrence and leaves the files alone.
  std::string out;
  CHECK(cli({"verify", "--ambient", "prelude::seq::group_seq_properties", good.string()}, &out) == kExitOk);
  CHECK(out.find("verified 1 of 1") != std::string::npos);
}

TEST_CASE("cli verify output and metrics file") {
  fs::path good = scratch("report.tv"), metrics = scratch("report.csv");
  write_text(good,
             "proof fn push_contains(a: Seq<int>) {\n"
             "    broadcast use {prelude::seq::group_seq_properties};\n"
             "    assert(a.push(3).contains(3));\n"
             "}\n");
  std::string out;
  REQUIRE(cli({"verify", good.string(), "--no-timing", "--broadcast-usage-info", "--metrics-out", metrics.string()},
              &out) == kExitOk);
  CHECK(out.find("PASS report::push_contains") != std::string::npos);
  CHECK(out.find("time_ms") == std::string::npos);
  CHECK(out.find("        - (group) prelude::seq::group_seq_properties,\n") != std::string::npos);
  CHECK(read_metrics(metrics.string()).size() == 1);
}

TEST_CASE("cli compare and minimize --write") {
  fs::path src = scratch("mini.tv"), a = scratch("a.csv"), b = scratch("b.csv"), csv = scratch("ratios.csv");
  write_text(src,
             "proof fn f(x: int)\n    requires x > 1,\n    ensures x > 0,\n{\n    assert(x > 1);\n}\n");
  REQUIRE(cli({"verify", src.string(), "--metrics-out", a.string()}) == kExitOk);
  REQUIRE(cli({"verify", src.string(), "--metrics-out", b.string()}) == kExitOk);
  std::string out;
  CHECK(cli({"compare", a.string(), b.string(), "--csv", csv.string()}, &out) == kExitOk);
  CHECK(out.find("functions over 2x") != std::string::npos);
  CHECK(fs::exists(csv));

  fs::path json = scratch("mini.json");
  REQUIRE(cli({"minimize", src.string(), "--write", "--report-json", json.string()}, &out) == kExitOk);
  CHECK(out.find("original 1, minimized 0") != std::string::npos);
  std::ifstream in(src);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("assert") == std::string::npos);
  CHECK(cli({"verify", src.string()}) == kExitOk);
  CHECK(fs::exists(json));
}

TEST_CASE("usage report trim re-verifies the corpus") {
  auto sources = read_sources(expand_inputs({TUNAV_SOURCE_DIR "/corpus"}));
  Workspace ws = load_workspace(sources);
  RunReport base = run_verification(ws, RunOptions{});
  REQUIRE(base.all_verified());
  RunOptions trimmed;
  trimmed.default_prelude = false;
  for (const auto& f : base.functions) {
    // Replace the function's imports by exactly the facts its report names.
    Workspace variant = ws;
    for (auto& m : variant.user)
      for (auto& d : m.decls) {
        if (d.kind != DeclKind::ProofFn || m.module_name + "::" + d.name != f.path) continue;
        strip_uses(d.body);
        if (f.used_facts.empty()) continue;
        Stmt use;
        use.kind = StmtKind::BroadcastUse;
        use.span = d.span;
        use.paths.assign(f.used_facts.begin(), f.used_facts.end());
        d.body.insert(d.body.begin(), use);
      }
    RunReport r = run_verification(variant, trimmed, [&](const FnInstance& fn) { return fn.path == f.path; });
    INFO(f.symbol);
    REQUIRE(r.functions.size() == 1);
    CHECK(r.functions[0].status == Status::Verified);
  }
}
