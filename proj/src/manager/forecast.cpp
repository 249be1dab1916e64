// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/manager/forecast.hpp"

#include <algorithm>
#include <cmath>

namespace fluid {

WorkloadHistory::WorkloadHistory(double half_life_ms, std::size_t top_m, double prune_below)
    : half_life_ms_(half_life_ms), top_m_(top_m), prune_below_(prune_below) {
  if (half_life_ms_ <= 0) throw Error(ErrorCode::InvalidArgument, "half-life must be positive");
}

double WorkloadHistory::decay(TimestampMs from, TimestampMs to) const {
  if (to <= from) return 1.0;
  return std::exp2(-static_cast<double>(to - from) / half_life_ms_);
}

void WorkloadHistory::observe(const Query& q, TimestampMs now, const nlohmann::json& summary) {
  const std::string key = q.template_key();
  Template& t = templates_[key];
  const double d = decay(t.updated, now);
  if (t.key.empty()) {
    t.key = key;
  } else {
    t.weight *= d;
    for (auto& [k, c] : t.constants) c.weight *= d;
  }
  t.weight += 1.0;
  t.updated = std::max(t.updated, now);
  t.example = q;
  ++t.count;

  std::vector<FilterPredicate> eq;
  for (const auto& p : q.predicates)
    if (p.op == CompareOp::Eq) eq.push_back(p);
  eq = normalize_conjunction(std::move(eq));
  if (!eq.empty()) {
    std::string ck;
    for (const auto& p : eq) ck += p.key() + "\n";
    ConstantSet& c = t.constants[ck];
    c.predicates = eq;
    c.weight += 1.0;
    ++c.count;
  }
  std::erase_if(t.constants, [&](const auto& kv) { return kv.second.weight < prune_below_; });

  if (!summary.is_null()) {
    summaries_.push_back(summary);
    if (summaries_.size() > 256) summaries_.erase(summaries_.begin());
  }
}

double WorkloadHistory::weight(const std::string& key, TimestampMs now) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) return 0.0;
  return it->second.weight * decay(it->second.updated, now);
}

std::vector<WorkloadHistory::ForecastEntry> WorkloadHistory::forecast(TimestampMs now) const {
  std::vector<ForecastEntry> out;
  for (const auto& [key, t] : templates_) {
    const double d = decay(t.updated, now);
    const double w = t.weight * d;
    if (w < prune_below_) continue;
    ForecastEntry e;
    e.key = key;
    e.example = t.example;
    e.weight = w;
    double cw = 0;
    for (const auto& [ck, c] : t.constants) {
      if (c.weight * d < prune_below_) continue;
      ConstantSet cs = c;
      cs.weight *= d;
      cw += cs.weight;
      e.constants.push_back(std::move(cs));
    }
    for (auto& c : e.constants) c.weight /= cw;
    std::sort(e.constants.begin(), e.constants.end(), [](const ConstantSet& a, const ConstantSet& b) {
      return a.weight != b.weight ? a.weight > b.weight : a.predicates < b.predicates;
    });
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const ForecastEntry& a, const ForecastEntry& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.key < b.key;
  });
  if (out.size() > top_m_) out.resize(top_m_);
  double total = 0;
  for (const auto& e : out) total += e.weight;
  for (auto& e : out) e.weight /= total;
  return out;
}

}  // namespace fluid
