#include "tunav/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tunav {

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MetricsRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("malformed metrics row: " + line);
    rows.push_back(MetricsRow{f[0], f[1], std::stod(f[2]), std::stol(f[3]), std::stol(f[4]), std::stoi(f[5]),
                              std::stol(f[6]), f[7]});
  }
  return rows;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (path.size() < 5 || path.substr(path.size() - 5) != ".json") return parse_metrics_csv(os.str());
  std::vector<MetricsRow> rows;
  for (const auto& j : nlohmann::json::parse(os.str())) {
    rows.push_back(MetricsRow{j.at("function"), j.at("status"), j.at("time_ms"), j.at("obligations"),
                              j.at("instantiations"), j.at("rounds"), j.at("context_facts"), j.at("strategy")});
  }
  return rows;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 1;
  std::sort(v.begin(), v.end());
  // Nearest-rank definition.
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size(), std::max<std::size_t>(rank, 1)) - 1];
}

}  // namespace

Comparison compare_metrics(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b) {
  std::map<std::string, const MetricsRow*> ma, mb;
  for (const auto& r : a) ma[r.function] = &r;
  for (const auto& r : b) mb[r.function] = &r;
  std::vector<std::string> diff;
  for (const auto& [k, v] : ma)
    if (!mb.count(k)) diff.push_back(k);
  for (const auto& [k, v] : mb)
    if (!ma.count(k)) diff.push_back(k);
  if (!diff.empty()) {
    std::string msg = "function sets differ:";
    for (const auto& d : diff) msg += " " + d;
    throw MismatchError(msg);
  }
  Comparison c;
  std::vector<double> ratios;
  for (const auto& [fn, ra] : ma) {
    const MetricsRow* rb = mb.at(fn);
    RatioRow row{fn, ra->time_ms, rb->time_ms, 1, ra->instantiations, rb->instantiations};
    if (ra->time_ms > 0)
      row.ratio = rb->time_ms / ra->time_ms;
    else
      row.ratio = rb->time_ms > 0 ? INFINITY : 1;
    ratios.push_back(row.ratio);
    if (row.ratio > 2) ++c.over_2x;
    c.total_inst_a += row.inst_a;
    c.total_inst_b += row.inst_b;
    c.rows.push_back(row);
  }
  c.median = quantile(ratios, 0.5);
  c.p90 = quantile(ratios, 0.9);
  c.max = ratios.empty() ? 1 : *std::max_element(ratios.begin(), ratios.end());
  return c;
}

std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os << "function,time_a_ms,time_b_ms,ratio,instantiations_a,instantiations_b\n" << std::fixed << std::setprecision(3);
  for (const auto& r : c.rows)
    os << r.function << "," << r.time_a << "," << r.time_b << "," << r.ratio << "," << r.inst_a << "," << r.inst_b
       << "\n";
  return os.str();
}

std::string comparison_summary(const Comparison& c) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "functions: " << c.rows.size() << "\n"
     << "time ratio b/a: median " << c.median << ", p90 " << c.p90 << ", max " << c.max << "\n"
     << "functions over 2x: " << c.over_2x << "\n"
     << "instantiations: a " << c.total_inst_a << ", b " << c.total_inst_b << "\n";
  return os.str();
}

}  // namespace tunav
