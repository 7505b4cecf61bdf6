#include "tunav/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tunav/prelude.hpp"

namespace tunav {

std::vector<SourceInput> read_sources(const std::vector<std::string>& paths) {
  std::vector<SourceInput> out;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p);
    std::ostringstream os;
    os << in.rdbuf();
    out.push_back(SourceInput{p, os.str()});
  }
  return out;
}

std::vector<ProgramAst> Workspace::all() const {
  std::vector<ProgramAst> out = prelude;
  out.insert(out.end(), user.begin(), user.end());
  return out;
}

Workspace load_workspace(const std::vector<SourceInput>& sources) {
  Workspace ws;
  ws.prelude = load_prelude();
  for (const auto& s : sources) ws.user.push_back(parse_module(s.text, s.path));
  return ws;
}

bool RunReport::all_verified() const {
  return std::all_of(functions.begin(), functions.end(),
                     [](const FunctionReport& f) { return f.status == Status::Verified; });
}

const FunctionReport* RunReport::find(const std::string& symbol) const {
  for (const auto& f : functions)
    if (f.symbol == symbol || f.path == symbol) return &f;
  return nullptr;
}

const char* strategy_name(TriggerStrategy s) {
  return s == TriggerStrategy::AllTriggers ? "all-triggers" : "conservative";
}

std::vector<Outcome> prove_restricted(const std::vector<Obligation>& obligations, const Limits& limits,
                                      const std::function<bool(const QuantifiedFact&)>& keep) {
  std::vector<Outcome> out;
  for (const auto& ob : obligations) {
    Obligation copy = ob;
    copy.context.quantified.clear();
    for (const auto& f : ob.context.quantified)
      if (keep(*f)) copy.context.quantified.push_back(f);
    out.push_back(prove(copy, limits));
  }
  return out;
}

namespace {

struct Job {
  const FnInstance* fn = nullptr;
  std::vector<Obligation> obligations;
  std::string error;
  std::size_t layer = 0;
};

bool instantiated_path(const Obligation& ob, const Outcome& out, const std::string& path) {
  for (auto i : out.instantiated_facts)
    if (ob.context.quantified[i]->origin.path == path) return true;
  return false;
}

FunctionReport check_function(const Job& job, const RunOptions& options) {
  FunctionReport r;
  r.symbol = job.fn->symbol;
  r.path = job.fn->path;
  r.module = job.fn->module;
  r.span = job.fn->span;
  r.layer = job.layer;
  if (!job.error.empty()) {
    r.status = Status::Failed;
    r.error = job.error;
    return r;
  }

  std::vector<Outcome> outcomes;
  for (const auto& ob : job.obligations) outcomes.push_back(prove(ob, options.limits));

  bool any_failed = false, any_unknown = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& ob = job.obligations[i];
    const auto& out = outcomes[i];
    ObligationReport o;
    o.description = ob.describe();
    o.span = ob.site.span;
    o.status = out.status;
    o.reason = out.reason;
    o.metrics = out.metrics;
    o.context_facts = ob.context.quantified.size();
    r.obligations.push_back(o);
    r.instantiations += out.metrics.instantiations;
    r.rounds = std::max(r.rounds, out.metrics.rounds);
    r.time_ms += out.metrics.time_ms;
    r.context_facts = std::max(r.context_facts, ob.context.quantified.size());
    for (const auto& [k, v] : out.metrics.per_fact) r.per_fact[k] += v;
    if (out.status == Status::Failed) any_failed = true;
    if (out.status == Status::Unknown) {
      if (!any_unknown) r.reason = out.reason;
      any_unknown = true;
    }
  }
  r.status = any_failed ? Status::Failed : any_unknown ? Status::Unknown : Status::Verified;
  if (r.status != Status::Unknown) r.reason = UnknownReason::None;
  if (r.status != Status::Verified) return r;

  // Deletion-based refinement: drop each instantiated broadcast fact in turn
  // and keep the drop when every affected obligation still verifies.
  std::set<std::string> candidates;
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    for (auto f : outcomes[i].instantiated_facts) {
      const auto& origin = job.obligations[i].context.quantified[f]->origin;
      if (origin.is_broadcast()) candidates.insert(origin.path);
    }
  std::set<std::string> dropped;
  if (options.refine_usage) {
    for (const auto& path : candidates) {
      std::set<std::string> trial = dropped;
      trial.insert(path);
      auto keep = [&](const QuantifiedFact& f) { return !trial.count(f.origin.path); };
      std::vector<std::pair<std::size_t, Outcome>> rerun;
      bool ok = true;
      for (std::size_t i = 0; i < outcomes.size() && ok; ++i) {
        if (!instantiated_path(job.obligations[i], outcomes[i], path)) continue;
        auto res = prove_restricted({job.obligations[i]}, options.limits, keep);
        ok = res[0].status == Status::Verified;
        rerun.emplace_back(i, std::move(res[0]));
      }
      if (!ok) continue;
      // Indices refer to the restricted context; map them back.
      for (auto& [i, out] : rerun) {
        std::vector<std::size_t> kept;
        for (std::size_t f = 0; f < job.obligations[i].context.quantified.size(); ++f)
          if (keep(*job.obligations[i].context.quantified[f])) kept.push_back(f);
        std::set<std::size_t> mapped;
        for (auto f : out.instantiated_facts) mapped.insert(kept[f]);
        out.instantiated_facts = std::move(mapped);
        outcomes[i] = std::move(out);
      }
      dropped = std::move(trial);
    }
  }

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (const auto& o : outcomes[i].used_core) r.used_core.insert(o);
    for (auto f : outcomes[i].instantiated_facts) {
      const auto& fact = *job.obligations[i].context.quantified[f];
      if (!fact.origin.is_broadcast()) continue;
      r.used_facts.insert(fact.origin.path);
      for (const auto& g : fact.groups_via) r.used_groups.insert(g);
    }
  }
  return r;
}

void write_smtlib(const std::string& dir, const Job& job) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < job.obligations.size(); ++i) {
    std::string name = job.fn->symbol;
    for (auto& c : name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    std::ofstream out(std::filesystem::path(dir) / (name + "_" + std::to_string(i) + ".smt2"));
    out << emit_smtlib(job.obligations[i]);
  }
}

}  // namespace

RunReport run_verification(const Workspace& ws, const RunOptions& options, const FunctionFilter& filter) {
  auto start = std::chrono::steady_clock::now();
  RunReport report;
  Program program = resolve_program(ws.all());
  BroadcastRegistry registry = build_registry(program);
  report.order = order_tasks(program, registry);

  VcConfig cfg;
  cfg.strategy = options.strategy;
  cfg.fuel = options.fuel;
  cfg.default_prelude = options.default_prelude;
  cfg.ambient_uses = options.ambient_uses;
  VcGenerator gen(program, registry, cfg);

  // Obligations are generated up front: the generator caches lowered facts
  // and is not safe to share between threads.
  std::vector<Job> jobs;
  for (const auto& task : report.order.tasks) {
    const FnInstance& fn = program.functions[task.fn_index];
    if (is_prelude_module(fn.module) != options.prelude_only) continue;
    if (filter && !filter(fn)) continue;
    Job job;
    job.fn = &fn;
    job.layer = static_cast<std::size_t>(task.layer);
    try {
      job.obligations = gen.generate(fn);
    } catch (const std::exception& e) {
      job.error = e.what();
    }
    if (!options.smtlib_dir.empty() && job.error.empty()) write_smtlib(options.smtlib_dir, job);
    jobs.push_back(std::move(job));
  }
  report.warnings = gen.warnings;

  std::vector<FunctionReport> results(jobs.size());
  std::size_t completed = 0;
  std::mutex mu;
  std::size_t max_layer = 0;
  for (const auto& j : jobs) max_layer = std::max(max_layer, j.layer);
  for (std::size_t layer = 0; layer <= max_layer && !jobs.empty(); ++layer) {
    std::vector<std::size_t> here;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].layer == layer) here.push_back(i);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < here.size();) {
        FunctionReport r = check_function(jobs[here[k]], options);
        std::lock_guard<std::mutex> lock(mu);
        r.completion = completed++;
        results[here[k]] = std::move(r);
      }
    };
    std::size_t n = std::min<std::size_t>(std::max(1, options.jobs), here.size());
    if (n <= 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
      for (auto& t : threads) t.join();
    }
  }

  std::vector<std::size_t> idx(jobs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(jobs[a].fn->source_index, jobs[a].fn->symbol) <
           std::make_pair(jobs[b].fn->source_index, jobs[b].fn->symbol);
  });
  for (auto i : idx) report.functions.push_back(std::move(results[i]));
  report.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string usage_report(const FunctionReport& fn) {
  std::vector<std::string> entries;
  for (const auto& g : fn.used_groups) entries.push_back("(group) " + g);
  for (const auto& f : fn.used_facts) entries.push_back(f);
  std::string out = "checking this function used these broadcasted lemmas and broadcast groups:\n";
  for (std::size_t i = 0; i < entries.size(); ++i)
    out += "        - " + entries[i] + (i + 1 < entries.size() ? ",\n" : "\n");
  return out;
}

std::string render_run(const RunReport& report, bool usage_info, bool timing) {
  std::ostringstream os;
  std::size_t verified = 0;
  for (const auto& f : report.functions) {
    os << status_name(f.status);
    if (f.status == Status::Unknown) os << "(" << reason_name(f.reason) << ")";
    os << " " << f.symbol << "  obligations=" << f.obligations.size() << " instantiations=" << f.instantiations
       << " rounds=" << f.rounds;
    if (timing) os << " time_ms=" << std::fixed << std::setprecision(2) << f.time_ms;
    os << "\n";
    if (!f.error.empty()) os << "    error: " << f.error << "\n";
    for (const auto& o : f.obligations) {
      if (o.status == Status::Verified) continue;
      os << "    " << status_name(o.status);
      if (o.status == Status::Unknown) os << "(" << reason_name(o.reason) << ")";
      os << " " << o.description << "\n";
    }
    if (usage_info && f.status == Status::Verified) os << usage_report(f);
    if (f.status == Status::Verified) ++verified;
  }
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  os << "verified " << verified << " of " << report.functions.size() << " functions\n";
  return os.str();
}

void write_metrics_csv(const RunReport& report, const std::string& strategy, std::ostream& out) {
  out << "function,status,time_ms,obligations,instantiations,rounds,context_facts,strategy\n";
  for (const auto& f : report.functions) {
    out << f.symbol << "," << status_name(f.status) << "," << std::fixed << std::setprecision(3) << f.time_ms << ","
        << f.obligations.size() << "," << f.instantiations << "," << f.rounds << "," << f.context_facts << ","
        << strategy << "\n";
  }
}

std::string metrics_json(const RunReport& report, const std::string& strategy) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& f : report.functions) {
    rows.push_back({{"function", f.symbol},
                    {"status", status_name(f.status)},
                    {"time_ms", f.time_ms},
                    {"obligations", f.obligations.size()},
                    {"instantiations", f.instantiations},
                    {"rounds", f.rounds},
                    {"context_facts", f.context_facts},
                    {"strategy", strategy},
                    {"per_fact", f.per_fact}});
  }
  return rows.dump(2) + "\n";
}

void write_metrics(const RunReport& report, const std::string& strategy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    out << metrics_json(report, strategy);
  else
    write_metrics_csv(report, strategy, out);
}

}  // namespace tunav
