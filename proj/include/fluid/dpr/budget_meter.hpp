// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fluid/types.hpp"

namespace fluid {

struct InstanceUsage {
  double attributed = 0;    // shared node cost split evenly among its users
  double standalone = 0;    // what the instance would cost running alone
  std::uint64_t records = 0;
  std::uint64_t skipped = 0;

  InstanceUsage& operator+=(const InstanceUsage& o) {
    attributed += o.attributed;
    standalone += o.standalone;
    records += o.records;
    skipped += o.skipped;
    return *this;
  }
};

struct IntervalUsage {
  std::int64_t index = 0;
  TimestampMs start = 0;
  double units = 0;
  std::uint64_t records = 0;
  std::map<std::string, InstanceUsage> instances;
};

// Compute units spent by the DPR runtime, bucketed by the ingest interval of
// the records they were spent on.
class BudgetMeter {
 public:
  explicit BudgetMeter(TimestampMs interval_ms = 1000);

  TimestampMs interval_ms() const { return interval_ms_; }
  std::int64_t interval_of(TimestampMs ingest_ts) const;

  void record(std::int64_t interval, double units, std::uint64_t records,
              const std::map<std::string, InstanceUsage>& per_instance);

  double units_in(std::int64_t interval) const;
  std::optional<IntervalUsage> interval(std::int64_t index) const;
  // Intervals with index in [from, to], ascending, only those with activity.
  std::vector<IntervalUsage> intervals(std::int64_t from, std::int64_t to) const;
  std::optional<std::int64_t> latest_interval() const;

  InstanceUsage instance_total(const std::string& instance) const;
  double total_units() const;

 private:
  TimestampMs interval_ms_;
  mutable std::mutex mu_;
  std::map<std::int64_t, IntervalUsage> intervals_;
  std::map<std::string, InstanceUsage> totals_;
  double total_units_ = 0;
};

}  // namespace fluid
