#include "tunav/minimize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace tunav {

namespace {

void walk_sites(const std::vector<Stmt>& stmts, const std::string& fn, std::optional<SourceSpan> parent,
                std::vector<AssertSite>& out) {
  for (const auto& s : stmts) {
    if (s.kind == StmtKind::Assert) {
      out.push_back(AssertSite{s.span, AssertSiteKind::Assert, fn, out.size(), parent});
    } else if (s.kind == StmtKind::AssertBy) {
      out.push_back(AssertSite{s.span, AssertSiteKind::AssertBy, fn, out.size(), parent});
      walk_sites(s.body, fn, s.span, out);
    }
  }
}

Workspace without(const Workspace& ws, const std::set<SourceSpan>& spans) {
  Workspace out;
  out.prelude = ws.prelude;
  for (const auto& m : ws.user) {
    std::set<SourceSpan> here;
    for (const auto& s : spans)
      if (s.file == m.path) here.insert(s);
    out.user.push_back(here.empty() ? m : remove_sites(m, here));
  }
  return out;
}

int severity(Status s) { return s == Status::Failed ? 2 : s == Status::Unknown ? 1 : 0; }

// Worst status over the run, Failed when nothing was checked.
std::pair<Status, UnknownReason> run_status(const RunReport& r) {
  if (r.functions.empty()) return {Status::Failed, UnknownReason::None};
  Status worst = Status::Verified;
  UnknownReason reason = UnknownReason::None;
  for (const auto& f : r.functions)
    if (severity(f.status) > severity(worst)) {
      worst = f.status;
      reason = f.reason;
    }
  return {worst, reason};
}

RunOptions trial_options(const RunOptions& options) {
  RunOptions o = options;
  o.refine_usage = false;
  o.smtlib_dir.clear();
  return o;
}

FunctionFilter only(const std::string& fn_path) {
  return [fn_path](const FnInstance& f) { return f.path == fn_path; };
}

const char* kind_name(AssertSiteKind k) { return k == AssertSiteKind::AssertBy ? "assert-by" : "assert"; }

}  // namespace

std::vector<AssertSite> enumerate_assert_sites(const std::vector<ProgramAst>& modules) {
  std::vector<AssertSite> out;
  for (const auto& m : modules)
    for (const auto& d : m.decls)
      if (d.kind == DeclKind::ProofFn) walk_sites(d.body, m.module_name + "::" + d.name, std::nullopt, out);
  return out;
}

std::set<SourceSpan> labeled_redundant(const std::vector<SourceInput>& sources, const std::vector<AssertSite>& sites) {
  std::map<std::string, std::vector<std::string>> lines;
  for (const auto& s : sources) {
    std::istringstream in(s.text);
    std::string line;
    auto& v = lines[s.path];
    while (std::getline(in, line)) v.push_back(line);
  }
  std::set<SourceSpan> out;
  for (const auto& site : sites) {
    auto it = lines.find(site.span.file);
    if (it == lines.end() || site.span.line < 1 || static_cast<std::size_t>(site.span.line) > it->second.size())
      continue;
    if (it->second[site.span.line - 1].find("// @redundant") != std::string::npos) out.insert(site.span);
  }
  return out;
}

MinimizeResult minimize(const Workspace& ws, const RunOptions& options, MinimizeScope scope) {
  auto start = std::chrono::steady_clock::now();
  RunOptions opts = trial_options(options);
  RunReport baseline = run_verification(ws, opts);
  if (!baseline.all_verified()) {
    std::string msg = "input does not verify:";
    for (const auto& f : baseline.functions)
      if (f.status != Status::Verified) msg += " " + f.symbol;
    throw BaselineFailure(msg);
  }

  MinimizationReport report;
  std::vector<AssertSite> sites = enumerate_assert_sites(ws.user);
  report.original_count = sites.size();
  std::vector<SiteTrial> trials(sites.size());
  std::atomic<std::size_t> runs{1};

  // Runs the pass over `indices` (in order), re-verifying with `filter`.
  auto pass = [&](const std::vector<std::size_t>& indices, const FunctionFilter& filter) {
    std::set<SourceSpan> removed;
    for (auto i : indices) {
      const AssertSite& site = sites[i];
      SiteTrial& t = trials[i];
      t.site = site;
      if (site.parent && removed.count(*site.parent)) {
        t.skipped = true;
        t.removed = true;
        continue;
      }
      std::set<SourceSpan> attempt = removed;
      attempt.insert(site.span);
      RunReport r = run_verification(without(ws, attempt), opts, filter);
      ++runs;
      auto [status, reason] = run_status(r);
      t.status = status;
      t.reason = reason;
      if (status == Status::Verified) {
        removed = std::move(attempt);
        t.removed = true;
      }
    }
  };

  if (scope == MinimizeScope::Project) {
    std::vector<std::size_t> all(sites.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    pass(all, {});
  } else {
    std::vector<std::string> fns;
    std::map<std::string, std::vector<std::size_t>> by_fn;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (!by_fn.count(sites[i].function)) fns.push_back(sites[i].function);
      by_fn[sites[i].function].push_back(i);
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < fns.size();) pass(by_fn[fns[k]], only(fns[k]));
    };
    std::size_t n = std::min<std::size_t>(std::max(1, options.jobs), fns.size());
    if (n <= 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
      for (auto& t : threads) t.join();
    }
  }

  std::set<SourceSpan> removed;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    auto& counts = report.per_function[sites[i].function];
    ++counts.original;
    if (trials[i].removed) {
      removed.insert(sites[i].span);
      if (!trials[i].skipped) report.removed.push_back(sites[i]);
    } else {
      ++counts.surviving;
    }
    if (!trials[i].skipped && trials[i].status == Status::Unknown) ++report.unknown_trials;
  }
  // Children of removed blocks count as removed sites.
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (trials[i].skipped) report.removed.push_back(sites[i]);
  std::sort(report.removed.begin(), report.removed.end(),
            [](const AssertSite& a, const AssertSite& b) { return a.ordinal < b.ordinal; });
  report.trials = std::move(trials);
  report.surviving_count = report.original_count - report.removed.size();
  report.verification_runs = runs;
  report.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  MinimizeResult result;
  result.pruned = without(ws, removed);
  result.report = std::move(report);
  return result;
}

std::string render_minimization(const MinimizationReport& report) {
  std::ostringstream os;
  os << "asserts: original " << report.original_count << ", minimized " << report.surviving_count << " ("
     << report.removed.size() << " removed, " << report.verification_runs << " verification runs, "
     << report.unknown_trials << " unknown trials)\n";
  for (const auto& s : report.removed)
    os << "  removed " << kind_name(s.kind) << " at " << s.span.to_string() << " in " << s.function << "\n";
  for (const auto& [fn, c] : report.per_function) os << "  " << fn << ": " << c.original << " -> " << c.surviving << "\n";
  return os.str();
}

std::string minimization_json(const MinimizationReport& report) {
  nlohmann::json j;
  j["original_count"] = report.original_count;
  j["surviving_count"] = report.surviving_count;
  j["verification_runs"] = report.verification_runs;
  j["unknown_trials"] = report.unknown_trials;
  j["time_ms"] = report.time_ms;
  j["removed"] = nlohmann::json::array();
  for (const auto& s : report.removed)
    j["removed"].push_back({{"site", s.span.to_string()}, {"kind", kind_name(s.kind)}, {"function", s.function}});
  j["trials"] = nlohmann::json::array();
  for (const auto& t : report.trials)
    j["trials"].push_back({{"site", t.site.span.to_string()},
                           {"removed", t.removed},
                           {"skipped", t.skipped},
                           {"status", status_name(t.status)},
                           {"reason", reason_name(t.reason)}});
  j["per_function"] = nlohmann::json::object();
  for (const auto& [fn, c] : report.per_function)
    j["per_function"][fn] = {{"original", c.original}, {"surviving", c.surviving}};
  return j.dump(2) + "\n";
}

std::vector<FailureSample> sample_failures(const Workspace& ws, const RunOptions& options, std::size_t n,
                                           std::uint64_t seed) {
  RunOptions opts = trial_options(options);
  RunReport baseline = run_verification(ws, opts);
  std::map<std::string, double> base_ms;
  for (const auto& f : baseline.functions) base_ms[f.path] += f.time_ms;

  std::vector<AssertSite> sites = enumerate_assert_sites(ws.user);
  std::mt19937_64 rng(seed);
  std::shuffle(sites.begin(), sites.end(), rng);
  if (sites.size() > n) sites.resize(n);

  std::vector<FailureSample> out;
  for (const auto& site : sites) {
    RunReport r = run_verification(without(ws, {site.span}), opts, only(site.function));
    FailureSample s;
    s.site = site;
    std::tie(s.status, s.reason) = run_status(r);
    for (const auto& f : r.functions) s.trial_ms += f.time_ms;
    s.success_ms = base_ms[site.function];
    s.ratio = s.success_ms > 0 ? s.trial_ms / s.success_ms : 0;
    out.push_back(s);
  }
  return out;
}

void write_failure_samples_csv(const std::vector<FailureSample>& samples, std::ostream& out) {
  out << "site,function,status,reason,success_ms,trial_ms,ratio\n";
  for (const auto& s : samples)
    out << s.site.span.to_string() << "," << s.site.function << "," << status_name(s.status) << ","
        << reason_name(s.reason) << "," << std::fixed << std::setprecision(3) << s.success_ms << "," << s.trial_ms
        << "," << s.ratio << "\n";
}

}  // namespace tunav
