#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunav/driver.hpp"

namespace tunav {

enum class AssertSiteKind { Assert, AssertBy };

struct AssertSite {
  SourceSpan span;
  AssertSiteKind kind = AssertSiteKind::Assert;
  std::string function;  // declared path of the containing proof fn
  std::size_t ordinal = 0;  // source order across the whole input
  std::optional<SourceSpan> parent;  // enclosing assert-by block, if any
};

/// Assert sites of all proof fns in source order; nested sites follow their block.
std::vector<AssertSite> enumerate_assert_sites(const std::vector<ProgramAst>& modules);

/// Sites whose source line carries a `// @redundant` comment.
std::set<SourceSpan> labeled_redundant(const std::vector<SourceInput>& sources, const std::vector<AssertSite>& sites);

enum class MinimizeScope { Function, Project };

class BaselineFailure : public std::runtime_error {
 public:
  explicit BaselineFailure(const std::string& message) : std::runtime_error(message) {}
};

struct SiteTrial {
  AssertSite site;
  bool removed = false;
  bool skipped = false;  // inside a block that was already removed
  Status status = Status::Verified;  // worst status of the trial run
  UnknownReason reason = UnknownReason::None;
};

struct FunctionCounts {
  std::size_t original = 0;
  std::size_t surviving = 0;
};

struct MinimizationReport {
  std::size_t original_count = 0;
  std::size_t surviving_count = 0;
  std::vector<AssertSite> removed;
  std::vector<SiteTrial> trials;
  std::map<std::string, FunctionCounts> per_function;
  std::size_t verification_runs = 0;
  std::size_t unknown_trials = 0;
  double time_ms = 0;
};

struct MinimizeResult {
  MinimizationReport report;
  Workspace pruned;
};

/// Single forward pass over assert sites; each removal that keeps the scope
/// verified is kept. Unknown counts as failure. Throws BaselineFailure when the
/// input does not verify.
MinimizeResult minimize(const Workspace& ws, const RunOptions& options, MinimizeScope scope = MinimizeScope::Function);

std::string render_minimization(const MinimizationReport& report);
std::string minimization_json(const MinimizationReport& report);

struct FailureSample {
  AssertSite site;
  Status status = Status::Verified;
  UnknownReason reason = UnknownReason::None;
  double success_ms = 0;  // the containing function before the removal
  double trial_ms = 0;    // the same function after the removal
  double ratio = 0;
};

/// Removes `n` randomly chosen asserts one at a time (seeded) and times the
/// re-verification of the containing function against its original time.
std::vector<FailureSample> sample_failures(const Workspace& ws, const RunOptions& options, std::size_t n,
                                           std::uint64_t seed);

void write_failure_samples_csv(const std::vector<FailureSample>& samples, std::ostream& out);

}  // namespace tunav
