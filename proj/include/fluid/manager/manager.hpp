// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/dpr/runtime.hpp"
#include "fluid/manager/budget_trace.hpp"
#include "fluid/manager/forecast.hpp"
#include "fluid/manager/knapsack.hpp"
#include "fluid/query/planner.hpp"

namespace fluid {

enum class ManagerMode { Manual, Auto };

const char* manager_mode_name(ManagerMode m);
ManagerMode parse_manager_mode(std::string_view s);

struct ManagerOptions {
  double half_life_ms = 600'000;
  std::size_t top_m = 8;
  TimestampMs tick_period_ms = 10'000;
  TimestampMs min_active_ms = 30'000;
  std::size_t sample_records = 1000;
  double cost_safety = 1.1;               // applied to estimated cost rates before selection
  std::uint64_t min_live_records = 1000;  // live stats replace the sample only past this
  std::uint64_t resample_every = 50'000;  // records between sample re-estimates of a candidate
  std::uint64_t repeat_threshold = 2;     // constant sets seen this often get pre-filter/aggregate candidates
  double default_budget = 0;              // used when no budget trace is set
};

struct DprCandidate {
  DprSpec spec;
  StructureDescriptor descriptor;
  std::string rule;  // "index" | "prefilter" | "aggregate"
  std::vector<std::string> templates;
  double sample_cost = 0;
  std::optional<double> live_cost;
  double cost = 0;      // rate used by select: max(sample, live) * safety
  double benefit = 0;
  std::optional<std::string> running_instance;
  bool selected = false;

  nlohmann::json to_json() const;
};

struct ManagerDecision {
  TimestampMs at = 0;
  double budget = 0;
  std::vector<std::string> chosen;   // DPR ids
  double value = 0;
  double cost = 0;                   // chosen + kept cost rate
  std::vector<std::string> started;  // instance ids
  std::vector<std::string> stopped;
  std::vector<std::string> kept;     // unchosen but younger than the minimum active duration
  std::string rationale;

  nlohmann::json to_json() const;
};

// Recent records used to estimate costs and selectivities.
class Sample {
 public:
  Sample() = default;
  Sample(const LogSnapshot& log, std::size_t n);

  std::span<const RawEvent> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  // Fraction of sampled records satisfying the conjunction; at least 0.5/n so
  // that unseen constants still cost something.
  double selectivity(const std::vector<FilterPredicate>& preds) const;
  // Records per millisecond of event time.
  double rate_per_ms() const;

 private:
  std::vector<RawEvent> events_;
  mutable std::map<std::string, double> cache_;
};

// Units per record of `spec` run alone over `sample`; falls back to the
// declared hint, then to the static DAG sum, on an empty sample.
double estimate_cost(const DprSpec& spec, std::span<const RawEvent> sample);

class DprManager {
 public:
  DprManager(const RawLog& log, DprRuntime& runtime, CostModel cm = {}, ManagerOptions options = {});

  void set_mode(ManagerMode m);
  ManagerMode mode() const;
  void set_budget_trace(BudgetTrace trace);
  double budget_at(TimestampMs t) const;
  const ManagerOptions& options() const { return options_; }

  void observe_query(const Query& q, TimestampMs now, const nlohmann::json& summary = {});
  std::vector<WorkloadHistory::ForecastEntry> forecast(TimestampMs now) const;

  // Rule-driven candidates for the forecast, without cost/benefit.
  std::vector<DprCandidate> generate_candidates(const std::vector<WorkloadHistory::ForecastEntry>& f) const;
  // b = sum over templates of weight x share x max(0, raw plan cost - plan cost with the structure at
  // projected coverage).
  double estimate_benefit(const DprCandidate& c, const std::vector<WorkloadHistory::ForecastEntry>& f,
                          const Sample& sample) const;

  // One manager cycle; a no-op returning an empty decision in manual mode.
  ManagerDecision tick(TimestampMs now);
  bool due(TimestampMs now) const;

  nlohmann::json state(TimestampMs now) const;
  std::vector<ManagerDecision> decisions() const;

 private:
  std::vector<DprCandidate> evaluate(TimestampMs now, const Sample& sample);

  const RawLog& log_;
  DprRuntime& runtime_;
  CostModel cm_;
  ManagerOptions options_;

  mutable std::mutex mu_;
  ManagerMode mode_ = ManagerMode::Manual;
  std::optional<BudgetTrace> trace_;
  WorkloadHistory history_;
  std::optional<TimestampMs> last_tick_;
  std::map<std::string, TimestampMs> started_at_;  // instance id -> manager time
  std::map<std::string, TimestampMs> stopped_at_;  // dpr id -> manager time
  std::map<std::string, std::pair<double, Offset>> sample_costs_;  // dpr id -> (cost, log hi)
  std::vector<DprCandidate> last_candidates_;
  std::vector<ManagerDecision> decisions_;
};

}  // namespace fluid
