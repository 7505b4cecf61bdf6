#include "tunav/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>

#include <CLI11.hpp>

#include "tunav/compare.hpp"
#include "tunav/driver.hpp"
#include "tunav/minimize.hpp"

namespace tunav {

namespace fs = std::filesystem;

std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (!fs::is_directory(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".tv") found.push_back(e.path().string());
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

namespace {

struct Config {
  std::vector<std::string> files;
  std::string strategy = "conservative";
  int fuel = 1;
  int max_rounds = Limits{}.max_rounds;
  long max_instantiations = Limits{}.max_instantiations;
  long time_budget_ms = Limits{}.time_budget_ms;
  bool usage_info = false;
  bool no_default_prelude = false;
  std::string smtlib_dir;
  std::string metrics_out;
  int jobs = 1;
  bool no_timing = false;
  std::vector<std::string> ambient;
  bool prelude_only = false;

  RunOptions options() const {
    RunOptions o;
    o.strategy = strategy == "all-triggers" ? TriggerStrategy::AllTriggers : TriggerStrategy::Conservative;
    o.fuel = fuel;
    o.default_prelude = !no_default_prelude;
    o.ambient_uses = ambient;
    o.limits.max_rounds = max_rounds;
    o.limits.max_instantiations = max_instantiations;
    o.limits.time_budget_ms = time_budget_ms;
    o.jobs = jobs;
    o.prelude_only = prelude_only;
    o.smtlib_dir = smtlib_dir;
    return o;
  }
};

void add_common(CLI::App* cmd, Config& c, bool files_required) {
  auto* files = cmd->add_option("files", c.files, "Input .tv files or directories");
  if (files_required) files->required();
  cmd->add_option("--trigger-strategy", c.strategy, "Trigger selection when none is marked")
      ->check(CLI::IsMember({"conservative", "all-triggers"}));
  cmd->add_option("--fuel", c.fuel, "Unfolding depth for recursive spec fns")->check(CLI::Range(0, 64));
  cmd->add_option("--max-rounds", c.max_rounds, "E-matching rounds per obligation")->check(CLI::Range(1, 1000));
  cmd->add_option("--max-instantiations", c.max_instantiations, "Instantiations per obligation")
      ->check(CLI::Range(1L, 100000000L));
  cmd->add_option("--time-budget-ms", c.time_budget_ms, "Wall-clock budget per obligation")
      ->check(CLI::Range(1L, 86400000L));
  cmd->add_flag("--no-default-prelude", c.no_default_prelude, "Do not import the default prelude group");
  cmd->add_option("--ambient", c.ambient, "Group or fact imported into every user module (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("--jobs,-j", c.jobs, "Worker threads")->check(CLI::Range(1, 256));
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<SourceInput> load_inputs(const Config& c) {
  std::vector<std::string> paths = expand_inputs(c.files);
  for (const auto& p : paths)
    if (!fs::is_regular_file(p)) throw UsageError("no such file: " + p);
  return read_sources(paths);
}

int do_verify(const Config& c, std::ostream& out) {
  Workspace ws = load_workspace(load_inputs(c));
  RunReport report = run_verification(ws, c.options());
  out << render_run(report, c.usage_info, !c.no_timing);
  if (!c.metrics_out.empty()) write_metrics(report, c.strategy, c.metrics_out);
  return report.all_verified() ? kExitOk : kExitFailure;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

int do_minimize(const Config& c, const std::string& scope, bool write, const std::string& report_json,
                std::ostream& out) {
  Workspace ws = load_workspace(load_inputs(c));
  MinimizeResult r = minimize(ws, c.options(), scope == "project" ? MinimizeScope::Project : MinimizeScope::Function);
  out << render_minimization(r.report);
  if (!report_json.empty()) write_file(report_json, minimization_json(r.report));
  if (write) {
    std::set<SourceSpan> removed;
    for (const auto& s : r.report.removed) removed.insert(s.span);
    for (const auto& m : ws.user) {
      bool touched = std::any_of(removed.begin(), removed.end(), [&](const SourceSpan& s) { return s.file == m.path; });
      if (touched) write_file(m.path, render_without_sites(m, removed));
    }
  }
  return kExitOk;
}

int do_compare(const std::string& a, const std::string& b, const std::string& csv, std::ostream& out) {
  for (const auto& p : {a, b})
    if (!fs::is_regular_file(p)) throw UsageError("no such file: " + p);
  Comparison cmp = compare_metrics(read_metrics(a), read_metrics(b));
  out << comparison_summary(cmp);
  if (csv.empty())
    out << comparison_csv(cmp);
  else
    write_file(csv, comparison_csv(cmp));
  return kExitOk;
}

int do_sample(const Config& c, std::size_t n, std::uint64_t seed, const std::string& csv, std::ostream& out) {
  Workspace ws = load_workspace(load_inputs(c));
  auto samples = sample_failures(ws, c.options(), n, seed);
  std::map<std::string, std::size_t> by_status;
  double max_trial = 0;
  for (const auto& s : samples) {
    ++by_status[status_name(s.status)];
    max_trial = std::max(max_trial, s.trial_ms);
  }
  if (csv.empty()) {
    write_failure_samples_csv(samples, out);
  } else {
    std::ofstream f(csv);
    if (!f) throw UsageError("cannot write " + csv);
    write_failure_samples_csv(samples, f);
  }
  out << "samples: " << samples.size();
  for (const auto& [k, v] : by_status) out << ", " << k << " " << v;
  out << "\n";
  if (!c.no_timing) out << "max trial time_ms: " << std::fixed << std::setprecision(3) << max_trial << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tunav: trigger-based verifier for broadcast lemmas", "tunav"};
  app.require_subcommand(1);
  Config c;

  auto* verify = app.add_subcommand("verify", "Verify proof fns");
  add_common(verify, c, false);
  verify->add_flag("--broadcast-usage-info", c.usage_info, "Report which broadcast facts each function used");
  verify->add_option("--emit-smtlib", c.smtlib_dir, "Write each obligation as SMT-LIB into DIR");
  verify->add_option("--metrics-out", c.metrics_out, "Per-function metrics (CSV, or JSON for .json)");
  verify->add_flag("--no-timing", c.no_timing, "Omit timing fields from the report");
  verify->add_flag("--prelude-only", c.prelude_only, "Verify the prelude's own lemmas");

  std::string scope = "function", report_json;
  bool write = false;
  auto* minimize_cmd = app.add_subcommand("minimize", "Remove redundant asserts");
  add_common(minimize_cmd, c, true);
  minimize_cmd->add_option("--minimize-scope", scope, "Re-verify the function or the whole project per trial")
      ->check(CLI::IsMember({"function", "project"}));
  minimize_cmd->add_flag("--write", write, "Rewrite the input files without the removed asserts");
  minimize_cmd->add_option("--report-json", report_json, "Write the minimization report as JSON");

  std::string metrics_a, metrics_b, compare_csv;
  auto* compare = app.add_subcommand("compare", "Compare two metrics files");
  compare->add_option("metrics_a", metrics_a, "Baseline metrics")->required();
  compare->add_option("metrics_b", metrics_b, "Candidate metrics")->required();
  compare->add_option("--csv", compare_csv, "Write the per-function ratio table here");

  std::size_t n = 20;
  std::uint64_t seed = 1;
  std::string sample_csv;
  auto* sample = app.add_subcommand("sample-failures", "Time verification failures of removed asserts");
  add_common(sample, c, true);
  sample->add_option("--n", n, "Number of asserts to remove")->check(CLI::Range(1, 100000));
  sample->add_option("--seed", seed, "Sampling seed");
  sample->add_option("--csv", sample_csv, "Write samples as CSV here instead of stdout");
  sample->add_flag("--no-timing", c.no_timing, "Omit the timing summary line");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return do_verify(c, out);
    if (minimize_cmd->parsed()) return do_minimize(c, scope, write, report_json, out);
    if (compare->parsed()) return do_compare(metrics_a, metrics_b, compare_csv, out);
    if (sample->parsed()) return do_sample(c, n, seed, sample_csv, out);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kExitFailure;
  } catch (const CycleError& e) {
    err << e.what() << "\n";
    return kExitFailure;
  } catch (const ResolveError& e) {
    err << e.what() << "\n";
    return kExitFailure;
  } catch (const BaselineFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const MismatchError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace tunav
