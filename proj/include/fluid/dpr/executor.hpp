// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fluid/dpr/budget_meter.hpp"
#include "fluid/dpr/catalog.hpp"
#include "fluid/fusion/fusion.hpp"
#include "fluid/json_probe.hpp"
#include "fluid/stream/raw_log.hpp"
#include "fluid/structures/structures.hpp"

namespace fluid {

struct ExecStats {
  std::uint64_t records = 0;
  std::uint64_t invocations = 0;
  std::array<std::uint64_t, kOpKindCount> by_kind{};
  double units = 0;
};

// Runs a fused DAG record by record. structures[t] receives the output of
// dag.targets[t]; instance_ids[s] is the meter name of spec s.
class DagExecutor {
 public:
  DagExecutor(FusedDag dag, std::vector<std::shared_ptr<Structure>> structures,
              std::vector<std::string> instance_ids);

  // Applies every event to every spec in the DAG. Holds the write lock of
  // each target structure for the duration of the call.
  void run(std::span<const RawEvent> events, BudgetMeter* meter = nullptr);

  const FusedDag& dag() const { return dag_; }
  const ExecStats& stats() const { return stats_; }
  std::uint64_t invocations(std::size_t node) const { return inv_[node]; }
  std::uint64_t passed(std::size_t node) const { return passed_[node]; }
  std::uint64_t skipped(std::size_t node) const { return skip_[node]; }
  // Pass rate of every Filter that saw at least one record.
  SelectivityProfile observed_selectivity() const;

 private:
  using Tuple = std::vector<std::pair<std::string, std::string>>;

  struct Compiled {
    FieldExtractor extractor;                 // ParseFields
    std::unique_ptr<TransformFn> transform;   // Transform
    std::string input, output;                // Transform
    std::vector<std::string> keep;            // Project
    std::string key;                          // HashIndex / aggregate key field
    std::vector<std::string> stored;          // PreFilteredLog fields
    double cost = 0;
    double share = 0;
  };

  bool eval(std::size_t i, const RawEvent& e);
  void flush(BudgetMeter* meter, std::int64_t interval, std::uint64_t records);

  FusedDag dag_;
  std::vector<std::shared_ptr<Structure>> structures_;
  std::vector<std::string> instance_ids_;
  std::vector<Compiled> compiled_;

  std::vector<std::uint64_t> inv_, passed_, skip_;
  std::vector<std::uint64_t> inv_pending_, skip_pending_;
  ExecStats stats_;

  // Per-record scratch.
  std::vector<Tuple> own_;
  std::vector<const Tuple*> out_;
  std::vector<FieldValue> fv_;
  std::vector<const std::string*> row_;
  std::string scratch_;
};

}  // namespace fluid
