// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fluid/types.hpp"

namespace fluid {

// Step function of available budget units per ingested record. Before the
// first point the budget is 0.
class BudgetTrace {
 public:
  BudgetTrace() = default;
  explicit BudgetTrace(std::vector<std::pair<TimestampMs, double>> points);

  double at(TimestampMs t) const;
  bool empty() const { return points_.empty(); }
  const std::vector<std::pair<TimestampMs, double>>& points() const { return points_; }

  // CSV with header `interval_start_ms,budget_units_per_record`.
  static BudgetTrace parse_csv(const std::string& text);
  static BudgetTrace load_csv(const std::string& path);
  std::string to_csv() const;
  void save_csv(const std::string& path) const;

 private:
  std::vector<std::pair<TimestampMs, double>> points_;  // ascending start
};

}  // namespace fluid
