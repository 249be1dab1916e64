// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "fluid/dpr/budget_meter.hpp"
#include "fluid/dpr/registry.hpp"
#include "fluid/dpr/runtime.hpp"
#include "fluid/manager/manager.hpp"
#include "fluid/query/engine.hpp"
#include "fluid/stream/raw_log.hpp"

namespace fluid {

struct EngineOptions {
  LogOptions log;
  RuntimeOptions runtime;
  CostModel cost;
  ManagerOptions manager;
  TimestampMs meter_interval_ms = 1000;
  // Manager and metrics clock; defaults to wall-clock ms. Scenarios supply
  // simulated time.
  std::function<TimestampMs()> clock;
};

// Everything a running system needs, wired together: the raw log, the DPR
// runtime with its registry and meter, the query engine and the manager.
class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  RawLog& log() { return *log_; }
  const RawLog& log() const { return *log_; }
  Registry& registry() { return registry_; }
  BudgetMeter& meter() { return meter_; }
  DprRuntime& runtime() { return *runtime_; }
  QueryEngine& queries() { return *queries_; }
  DprManager& manager() { return *manager_; }
  const EngineOptions& options() const { return options_; }

  TimestampMs now() const;

  Offset ingest(std::string_view payload);
  Offset ingest(std::string_view payload, TimestampMs ingest_ts);

  // Plans and runs the query and records it in the manager's history.
  QueryResult query(const Query& q, PlanMode mode = PlanMode::Stitched);

  // Starts the runtime thread and a thread ticking the manager every tick period.
  void start_background();
  void stop_background();

  // Closed meter intervals in [cursor, current), at most `limit`.
  nlohmann::json metrics(std::optional<std::int64_t> cursor, std::size_t limit = 3600) const;
  nlohmann::json stream_status() const;
  std::uint64_t ingested_in(std::int64_t interval) const;

 private:
  EngineOptions options_;
  std::unique_ptr<RawLog> log_;
  Registry registry_;
  BudgetMeter meter_;
  std::unique_ptr<DprRuntime> runtime_;
  std::unique_ptr<QueryEngine> queries_;
  std::unique_ptr<DprManager> manager_;

  mutable std::mutex ingest_mu_;
  std::map<std::int64_t, std::uint64_t> ingested_;  // per meter interval

  std::thread ticker_;
  std::atomic<bool> stop_{false};
};

}  // namespace fluid
