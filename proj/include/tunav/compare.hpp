#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tunav {

struct MetricsRow {
  std::string function;
  std::string status;
  double time_ms = 0;
  long obligations = 0;
  long instantiations = 0;
  int rounds = 0;
  long context_facts = 0;
  std::string strategy;
};

/// Reads a metrics file written by `write_metrics` (CSV or JSON by extension).
std::vector<MetricsRow> read_metrics(const std::string& path);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

struct RatioRow {
  std::string function;
  double time_a = 0, time_b = 0, ratio = 1;
  long inst_a = 0, inst_b = 0;
};

struct Comparison {
  std::vector<RatioRow> rows;  // sorted by function
  double median = 1, p90 = 1, max = 1;
  std::size_t over_2x = 0;
  long total_inst_a = 0, total_inst_b = 0;
};

class MismatchError : public std::runtime_error {
 public:
  explicit MismatchError(const std::string& m) : std::runtime_error(m) {}
};

/// Per-function time ratio b/a. Throws MismatchError naming the symmetric
/// difference when the function sets differ.
Comparison compare_metrics(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b);

std::string comparison_csv(const Comparison& c);
std::string comparison_summary(const Comparison& c);

}  // namespace tunav
