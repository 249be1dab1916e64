// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/budget_meter.hpp"

namespace fluid {

BudgetMeter::BudgetMeter(TimestampMs interval_ms) : interval_ms_(interval_ms) {
  if (interval_ms_ <= 0) throw Error(ErrorCode::InvalidArgument, "meter interval must be positive");
}

std::int64_t BudgetMeter::interval_of(TimestampMs ts) const {
  std::int64_t q = ts / interval_ms_;
  if (ts % interval_ms_ != 0 && ts < 0) --q;
  return q;
}

void BudgetMeter::record(std::int64_t interval, double units, std::uint64_t records,
                         const std::map<std::string, InstanceUsage>& per_instance) {
  std::lock_guard lk(mu_);
  auto& iv = intervals_[interval];
  iv.index = interval;
  iv.start = interval * interval_ms_;
  iv.units += units;
  iv.records += records;
  for (const auto& [id, u] : per_instance) {
    iv.instances[id] += u;
    totals_[id] += u;
  }
  total_units_ += units;
}

double BudgetMeter::units_in(std::int64_t interval) const {
  std::lock_guard lk(mu_);
  auto it = intervals_.find(interval);
  return it == intervals_.end() ? 0.0 : it->second.units;
}

std::optional<IntervalUsage> BudgetMeter::interval(std::int64_t index) const {
  std::lock_guard lk(mu_);
  auto it = intervals_.find(index);
  if (it == intervals_.end()) return std::nullopt;
  return it->second;
}

std::vector<IntervalUsage> BudgetMeter::intervals(std::int64_t from, std::int64_t to) const {
  std::lock_guard lk(mu_);
  std::vector<IntervalUsage> out;
  for (auto it = intervals_.lower_bound(from); it != intervals_.end() && it->first <= to; ++it) out.push_back(it->second);
  return out;
}

std::optional<std::int64_t> BudgetMeter::latest_interval() const {
  std::lock_guard lk(mu_);
  if (intervals_.empty()) return std::nullopt;
  return intervals_.rbegin()->first;
}

InstanceUsage BudgetMeter::instance_total(const std::string& instance) const {
  std::lock_guard lk(mu_);
  auto it = totals_.find(instance);
  return it == totals_.end() ? InstanceUsage{} : it->second;
}

double BudgetMeter::total_units() const {
  std::lock_guard lk(mu_);
  return total_units_;
}

}  // namespace fluid
