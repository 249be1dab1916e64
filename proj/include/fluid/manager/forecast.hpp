// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/query/query.hpp"
#include "fluid/types.hpp"

namespace fluid {

// Exponentially decayed query-template history. Weights halve every
// `half_life_ms` of (caller-supplied) time; each observation adds 1.
class WorkloadHistory {
 public:
  struct ConstantSet {
    std::vector<FilterPredicate> predicates;  // equality predicates of one concrete query
    double weight = 0;
    std::uint64_t count = 0;
  };
  struct Template {
    std::string key;
    Query example;  // most recent query of this shape
    double weight = 0;
    TimestampMs updated = 0;
    std::uint64_t count = 0;
    std::map<std::string, ConstantSet> constants;  // keyed by the conjunction's text
  };
  struct ForecastEntry {
    std::string key;
    Query example;
    double weight = 0;                         // normalized over the forecast
    std::vector<ConstantSet> constants;        // weights normalized within the template, descending
  };

  explicit WorkloadHistory(double half_life_ms = 600'000, std::size_t top_m = 8, double prune_below = 1e-3);

  void observe(const Query& q, TimestampMs now, const nlohmann::json& summary = {});
  // Top-m templates by decayed weight at `now`, normalized to sum 1.
  std::vector<ForecastEntry> forecast(TimestampMs now) const;
  // Decayed (unnormalized) weight of a template key at `now`.
  double weight(const std::string& key, TimestampMs now) const;
  std::size_t size() const { return templates_.size(); }
  const std::vector<nlohmann::json>& summaries() const { return summaries_; }
  double half_life_ms() const { return half_life_ms_; }

 private:
  double decay(TimestampMs from, TimestampMs to) const;

  double half_life_ms_;
  std::size_t top_m_;
  double prune_below_;
  std::map<std::string, Template> templates_;
  std::vector<nlohmann::json> summaries_;  // kept for richer predictors; unused by forecast()
};

}  // namespace fluid
