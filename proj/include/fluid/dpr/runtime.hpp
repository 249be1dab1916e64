// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fluid/dpr/budget_meter.hpp"
#include "fluid/dpr/executor.hpp"
#include "fluid/dpr/registry.hpp"
#include "fluid/dpr/spec.hpp"
#include "fluid/fusion/fusion.hpp"
#include "fluid/stream/raw_log.hpp"

namespace fluid {

struct RuntimeOptions {
  FusionLevel fusion = FusionLevel::Prefix;
  std::size_t batch_records = 2048;
};

struct InstanceInfo {
  std::string id;
  DprSpec spec;
  std::string owner;
  Offset activation = 0;
  std::optional<Offset> deactivation;
  bool finished = false;  // deactivated and fully processed
  std::vector<std::string> structure_ids;
  std::vector<StructureDescriptor> descriptors;
  InstanceUsage usage;

  bool running() const { return !deactivation; }
  nlohmann::json to_json() const;
};

// Executes the active DPR instances over the raw log. One cursor walks the
// log; each batch is cut at activation/deactivation offsets so that every
// record is seen by exactly the instances active at its offset, and each
// piece runs through the fused DAG of that instance set.
class DprRuntime {
 public:
  DprRuntime(RawLog& log, Registry& registry, BudgetMeter& meter, RuntimeOptions options = {});
  ~DprRuntime();
  DprRuntime(const DprRuntime&) = delete;
  DprRuntime& operator=(const DprRuntime&) = delete;

  // Validates and activates at the current hi-watermark. Returns the
  // instance id. AlreadyExists when an instance of the same DPR id runs.
  std::string start(DprSpec spec, std::string owner = "user");
  // Deactivates at the current hi-watermark; accepts an instance id or the
  // DPR id of a running instance. Returns the final coverage.
  Coverage stop(const std::string& id);

  // Processes records synchronously up to min(hi-watermark, until). Returns
  // the number of records consumed.
  std::size_t pump(std::optional<Offset> until = std::nullopt);

  void start_background();
  void stop_background();
  bool background() const { return thread_.joinable(); }
  // Waits until the cursor reaches the hi-watermark observed at call time.
  bool wait_caught_up(std::chrono::milliseconds timeout);

  Offset cursor() const { return cursor_.load(std::memory_order_acquire); }

  std::vector<InstanceInfo> instances() const;
  std::optional<InstanceInfo> instance(const std::string& id) const;
  // Instance id of the running instance of DPR `spec_id`.
  std::optional<std::string> running_instance_of(const std::string& spec_id) const;

  void set_fusion_level(FusionLevel level);
  FusionLevel fusion_level() const;
  // Fused DAG over the currently running instances, plus their specs.
  std::pair<FusedDag, std::vector<DprSpec>> current_dag() const;

  ExecStats totals() const;

 private:
  struct Instance {
    std::string id;
    DprSpec spec;
    std::string owner;
    Offset activation = 0;
    std::optional<Offset> deactivation;
    bool finished = false;
    std::vector<std::string> sink_nodes;
    std::vector<std::string> structure_ids;
    std::vector<StructureDescriptor> descriptors;
    std::vector<std::shared_ptr<Structure>> structures;
  };
  using InstancePtr = std::shared_ptr<Instance>;

  std::size_t step(Offset until);
  DagExecutor& executor_for(const std::vector<InstancePtr>& set);
  void finish_due(Offset pos);
  InstanceInfo info(const Instance& inst) const;
  InstancePtr find_locked(const std::string& id) const;

  RawLog& log_;
  Registry& registry_;
  BudgetMeter& meter_;
  RuntimeOptions options_;

  mutable std::mutex mu_;  // instances_, options_.fusion, seq_
  std::vector<InstancePtr> instances_;
  std::uint64_t seq_ = 0;

  std::mutex exec_mu_;  // one batch at a time
  std::map<std::string, std::unique_ptr<DagExecutor>> executors_;
  FusionLevel cached_level_ = FusionLevel::Prefix;
  std::vector<RawEvent> batch_;
  std::atomic<Offset> cursor_{0};

  mutable std::mutex totals_mu_;
  ExecStats totals_;

  std::thread thread_;
  std::atomic<bool> stop_{false};
};

}  // namespace fluid
