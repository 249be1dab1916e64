// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/dpr/spec.hpp"
#include "fluid/manager/budget_trace.hpp"
#include "fluid/manager/manager.hpp"
#include "fluid/scenario/generator.hpp"

namespace fluid {

enum class Strategy { Baseline, FluidManual, FluidAuto, Excessive };

const char* strategy_name(Strategy s);
Strategy parse_strategy(std::string_view s);

// Timeline step at `at_hours` after the stream start. Kinds:
//   query       {name, query, bind?: {var: row index}}   rows[i].key -> $var
//   start_dpr   {spec}            fluid-manual only
//   stop_dpr    {id}              fluid-manual only
//   manager     {mode}            fluid-auto only
// String values of the form "$var" are substituted from earlier bindings.
struct TimelineAction {
  double at_hours = 0;
  std::string kind;
  nlohmann::json body;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::optional<GeneratorParams> generator;  // used when no events file is given
  TimestampMs interval_ms = 3'600'000;
  int fusion_level = 1;
  std::vector<DprSpec> baseline;                 // empty: default baseline
  std::vector<std::string> excessive_fields;     // empty: default six
  ManagerOptions manager;
  std::vector<TimelineAction> timeline;
  std::optional<double> provisioned_units;       // per interval; default from a calibration pass

  static ScenarioSpec from_json(const nlohmann::json& j);
  static ScenarioSpec load(const std::string& path);
};

std::vector<DprSpec> default_baseline();
std::vector<std::string> default_excessive_fields();
// One index DPR per field, all parsing the same field list.
std::vector<DprSpec> excessive_specs(const std::vector<std::string>& fields);

struct IntervalRow {
  std::int64_t interval = 0;
  TimestampMs start_ms = 0;
  std::uint64_t records = 0;
  double units = 0;
  double provisioned = 0;
  double budget_per_record = 0;  // fluid-auto only
  double manager_units = 0;      // attributed to manager-owned instances
  int manager_running_at_end = 0;
};

struct QueryRow {
  double at_hours = 0;
  std::string name;
  nlohmann::json query;
  std::vector<RankedRow> rows;
  double latency_ms = 0;
  double plan_ms = 0;
  double est_cost = 0;
  double raw_cost = 0;
  std::string paths;  // e.g. "index+raw"
};

struct StrategyReport {
  Strategy strategy = Strategy::Baseline;
  std::vector<IntervalRow> intervals;
  std::vector<QueryRow> queries;
  std::vector<ManagerDecision> decisions;
  std::uint64_t records = 0;
  double total_units = 0;
  double wall_seconds = 0;

  double max_utilization() const;  // max units / provisioned
  // Intervals where manager-attributed units exceed budget x records.
  std::vector<std::int64_t> budget_violations() const;
  std::vector<std::int64_t> provision_violations() const;
};

struct RunOptions {
  std::string events_path;  // empty: generate from the scenario
  std::optional<BudgetTrace> budget;
  double speedup = 60;      // simulated seconds per wall second; 0 = as fast as possible
  std::vector<Strategy> strategies = {Strategy::FluidAuto};
};

struct ScenarioReport {
  std::string name;
  double provisioned = 0;
  BudgetTrace budget;
  std::vector<StrategyReport> strategies;

  // True when every strategy returned identical rows for every query.
  bool answers_identical() const;
  std::string utilization_csv() const;
  std::string queries_csv() const;
  std::string summary() const;
  void write(const std::string& dir) const;
};

// Events in arrival order, held in memory so strategies replay identical input.
std::vector<std::string> load_events(const ScenarioSpec& s, const std::string& events_path);

// Per-interval budget from a baseline consumption profile: (P - base_h) / r_h,
// exactly 0 in the busiest intervals.
BudgetTrace derive_budget(const StrategyReport& baseline, double provisioned);

StrategyReport run_strategy(const ScenarioSpec& s, Strategy strategy, const std::vector<std::string>& events,
                            const std::optional<BudgetTrace>& budget, double provisioned, double speedup,
                            bool run_timeline = true);

ScenarioReport run_scenario(const ScenarioSpec& s, const RunOptions& opt);

}  // namespace fluid
