// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <json.hpp>

#include "fluid/dpr/registry.hpp"
#include "fluid/query/planner.hpp"
#include "fluid/query/query.hpp"
#include "fluid/stream/raw_log.hpp"

namespace fluid {

enum class PlanMode { Stitched, RawOnly };

struct QueryResult {
  std::vector<RankedRow> rows;
  StitchedPlan plan;
  Offset snapshot_hi = 0;
  TimestampMs now = 0;
  double plan_ms = 0;
  double latency_ms = 0;  // plan + execute

  nlohmann::json to_json() const;
};

// Runs `plan` against the pinned log snapshot. A part whose structure is gone
// is answered by a raw scan of the same range.
GroupCounts execute_plan(const StitchedPlan& plan, const Query& q, const LogSnapshot& log);

// Group counts of the window's matching records inside `range`, by raw scan.
GroupCounts raw_scan(const Query& q, const EventWindow& w, const LogSnapshot& log, OffsetRange range);

class QueryEngine {
 public:
  QueryEngine(const RawLog& log, const Registry& registry, CostModel cm = {})
      : log_(log), registry_(registry), cm_(cm) {}

  QueryResult run(const Query& q, PlanMode mode = PlanMode::Stitched) const;

  // "now" for relative windows: the latest event_ts ingested, 0 on an empty log.
  TimestampMs now() const;
  const CostModel& cost_model() const { return cm_; }

 private:
  const RawLog& log_;
  const Registry& registry_;
  CostModel cm_;
};

}  // namespace fluid
