// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/manager/budget_trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fluid {

BudgetTrace::BudgetTrace(std::vector<std::pair<TimestampMs, double>> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].second < 0) throw Error(ErrorCode::InvalidArgument, "budget entries must be non-negative");
    if (i > 0 && points_[i].first == points_[i - 1].first)
      throw Error(ErrorCode::InvalidArgument, "duplicate interval start " + std::to_string(points_[i].first));
  }
}

double BudgetTrace::at(TimestampMs t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](TimestampMs v, const std::pair<TimestampMs, double>& p) { return v < p.first; });
  if (it == points_.begin()) return 0.0;
  return std::prev(it)->second;
}

BudgetTrace BudgetTrace::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<TimestampMs, double>> pts;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_not_of("0123456789-,. ") != std::string::npos) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "budget trace line " + std::to_string(lineno) + ": expected two columns");
    try {
      pts.emplace_back(std::stoll(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "budget trace line " + std::to_string(lineno) + ": not a number");
    }
  }
  return BudgetTrace(std::move(pts));
}

BudgetTrace BudgetTrace::load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open budget trace " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

std::string BudgetTrace::to_csv() const {
  std::ostringstream out;
  out << "interval_start_ms,budget_units_per_record\n";
  out.precision(10);
  for (const auto& [t, b] : points_) out << t << ',' << b << '\n';
  return out.str();
}

void BudgetTrace::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write budget trace " + path);
  f << to_csv();
}

}  // namespace fluid
