#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tunav/engine.hpp"
#include "tunav/resolve.hpp"
#include "tunav/vcgen.hpp"

namespace tunav {

struct SourceInput {
  std::string path;
  std::string text;
};

/// Reads files from disk. Throws std::runtime_error naming a missing file.
std::vector<SourceInput> read_sources(const std::vector<std::string>& paths);

/// Parsed inputs: the embedded prelude followed by user modules.
struct Workspace {
  std::vector<ProgramAst> prelude;
  std::vector<ProgramAst> user;

  std::vector<ProgramAst> all() const;
};

Workspace load_workspace(const std::vector<SourceInput>& sources);

struct RunOptions {
  TriggerStrategy strategy = TriggerStrategy::Conservative;
  int fuel = 1;
  bool default_prelude = true;
  std::vector<std::string> ambient_uses;  // groups or facts imported into every user module
  Limits limits;
  int jobs = 1;
  bool prelude_only = false;   // verify the prelude's own lemmas instead of user code
  bool refine_usage = true;    // shrink the reported broadcast set by deletion
  std::string smtlib_dir;      // write each obligation as SMT-LIB when non-empty
};

struct ObligationReport {
  std::string description;
  SourceSpan span;
  Status status = Status::Failed;
  UnknownReason reason = UnknownReason::None;
  ProveMetrics metrics;
  std::size_t context_facts = 0;
};

struct FunctionReport {
  std::string symbol;
  std::string path;
  std::string module;
  SourceSpan span;
  Status status = Status::Verified;
  UnknownReason reason = UnknownReason::None;
  std::string error;  // lowering or trigger error, when the function could not be checked
  std::vector<ObligationReport> obligations;
  long instantiations = 0;
  int rounds = 0;
  double time_ms = 0;
  std::size_t context_facts = 0;
  std::map<std::string, long> per_fact;
  // Broadcast facts (by declared path) still needed after refinement, and the
  // groups through which they were imported.
  std::set<std::string> used_facts;
  std::set<std::string> used_groups;
  // Origins of the refined core across all obligations.
  std::set<Origin> used_core;
  std::size_t layer = 0;
  std::size_t completion = 0;  // global completion sequence number
};

struct RunReport {
  std::vector<FunctionReport> functions;  // source order
  std::vector<std::string> warnings;
  TaskOrder order;
  double time_ms = 0;

  bool all_verified() const;
  const FunctionReport* find(const std::string& symbol) const;
};

/// Selects which proof fns to check; all of them when empty.
using FunctionFilter = std::function<bool(const FnInstance&)>;

/// Resolves, orders and verifies. Throws ResolveError / CycleError / ParseError.
RunReport run_verification(const Workspace& ws, const RunOptions& options, const FunctionFilter& filter = {});

/// Verification of already-generated obligations with a fact filter applied:
/// quantified facts for which `keep` returns false are dropped.
std::vector<Outcome> prove_restricted(const std::vector<Obligation>& obligations, const Limits& limits,
                                      const std::function<bool(const QuantifiedFact&)>& keep);

/// Usage report for one function.
std::string usage_report(const FunctionReport& fn);

/// Human-readable run summary, one line per function in source order.
std::string render_run(const RunReport& report, bool usage_info, bool timing);

/// Writes per-function metrics as CSV, or JSON when `path` ends in `.json`.
void write_metrics(const RunReport& report, const std::string& strategy, const std::string& path);
void write_metrics_csv(const RunReport& report, const std::string& strategy, std::ostream& out);
std::string metrics_json(const RunReport& report, const std::string& strategy);

const char* strategy_name(TriggerStrategy s);

}  // namespace tunav
