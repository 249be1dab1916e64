// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/query/engine.hpp"

#include <algorithm>
#include <chrono>

#include "fluid/json_probe.hpp"
#include "fluid/simd/kernels.hpp"

namespace fluid {

using nlohmann::json;

namespace {

// Field extraction for one query: predicate fields plus the group-by.
class RecordMatcher {
 public:
  RecordMatcher(const Query& q, std::vector<FilterPredicate> preds) : preds_(std::move(preds)) {
    std::vector<std::string> paths;
    auto slot = [&](const std::string& f) {
      auto it = std::find(paths.begin(), paths.end(), f);
      if (it != paths.end()) return static_cast<std::size_t>(it - paths.begin());
      paths.push_back(f);
      return paths.size() - 1;
    };
    for (const auto& p : preds_) pred_slot_.push_back(slot(p.field));
    group_slot_ = slot(q.group_by);
    values_.resize(paths.size());
    extractor_ = FieldExtractor(std::move(paths));
    for (const auto& p : preds_)
      if (p.op == CompareOp::Eq && p.value.size() > needle_.size()) needle_ = p.value;
  }

  // Cheap rejection: a matching record must contain the longest equality
  // constant verbatim unless the payload uses escapes.
  bool may_match(std::string_view payload) const {
    if (needle_.empty()) return true;
    if (simd::find(payload, needle_) != simd::npos) return true;
    return simd::find(payload, "\\") != simd::npos;
  }

  // Group key of a matching record, nullptr otherwise.
  const std::string* match(std::string_view payload) {
    extractor_.extract(payload, values_);
    for (std::size_t i = 0; i < preds_.size(); ++i) {
      const FieldValue& v = values_[pred_slot_[i]];
      if (!v.found || !preds_[i].eval(v.value)) return nullptr;
    }
    const FieldValue& g = values_[group_slot_];
    return g.found ? &g.value : nullptr;
  }

 private:
  std::vector<FilterPredicate> preds_;
  std::vector<std::size_t> pred_slot_;
  std::size_t group_slot_ = 0;
  FieldExtractor extractor_;
  std::vector<FieldValue> values_;
  std::string needle_;
};

void count_key(GroupCounts& counts, const std::string& key) {
  auto it = counts.find(key);
  if (it == counts.end()) {
    counts.emplace(key, 1);
  } else {
    ++it->second;
  }
}

GroupCounts probe_part(const PlanPart& part, const HashIndexStructure& idx, const Query& q, const EventWindow& w,
                       const LogSnapshot& log) {
  std::vector<Offset> offs;
  {
    auto lk = idx.read_lock();
    offs = idx.probe(part.lookup_value, Coverage(part.range));
  }
  RecordMatcher m(q, q.predicates);
  GroupCounts counts;
  for (Offset o : offs) {
    auto e = log.at(o);
    if (!e || !w.contains(e->event_ts)) continue;
    if (const std::string* k = m.match(e->payload)) count_key(counts, *k);
  }
  return counts;
}

GroupCounts filtered_part(const PlanPart& part, const PreFilteredLog& pfl, const Query& q, const EventWindow& w,
                          const LogSnapshot& log) {
  std::vector<FilterPredicate> residual;
  for (const auto& p : q.predicates)
    if (!implied_by(p, pfl.descriptor().filters)) residual.push_back(p);
  GroupCounts counts;
  auto lk = pfl.read_lock();
  const std::size_t b = pfl.lower_bound(part.range.lo), e = pfl.lower_bound(part.range.hi);
  if (part.fetch_raw) {
    RecordMatcher m(q, residual);
    for (std::size_t i = b; i < e; ++i) {
      if (!w.contains(pfl.event_ts_at(i))) continue;
      auto ev = log.at(pfl.offset_at(i));
      if (!ev) continue;
      if (const std::string* k = m.match(ev->payload)) count_key(counts, *k);
    }
    return counts;
  }
  std::vector<int> cols;
  for (const auto& p : residual) cols.push_back(pfl.column_of(p.field));
  const int gcol = pfl.column_of(q.group_by);
  for (std::size_t i = b; i < e; ++i) {
    if (!w.contains(pfl.event_ts_at(i))) continue;
    bool ok = true;
    for (std::size_t r = 0; r < residual.size() && ok; ++r) {
      const std::string* v = pfl.value_at(i, static_cast<std::size_t>(cols[r]));
      ok = v && residual[r].eval(*v);
    }
    if (!ok) continue;
    if (const std::string* k = pfl.value_at(i, static_cast<std::size_t>(gcol))) count_key(counts, *k);
  }
  return counts;
}

GroupCounts aggregate_part(const PlanPart& part, const MaterializedAggregate& agg, const Candidate& cand,
                           const Query& q, const EventWindow& w, const LogSnapshot& log) {
  GroupCounts counts;
  std::vector<OffsetRange> read;
  {
    auto lk = agg.read_lock();
    for (std::uint64_t k : usable_buckets(agg, part.range, cand.coverage, w)) {
      if (const auto* b = agg.bucket(k)) merge_into(counts, b->counts);
      read.push_back(agg.bucket_range(k));
    }
  }
  Coverage rest = Coverage(part.range).subtract(Coverage::from(read));
  for (const auto& r : rest.intervals()) merge_into(counts, raw_scan(q, w, log, r));
  return counts;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

GroupCounts raw_scan(const Query& q, const EventWindow& w, const LogSnapshot& log, OffsetRange range) {
  RecordMatcher m(q, q.predicates);
  GroupCounts counts;
  log.scan_window(w, range, [&](const RawEvent& e) {
    if (!m.may_match(e.payload)) return;
    if (const std::string* k = m.match(e.payload)) count_key(counts, *k);
  });
  return counts;
}

GroupCounts execute_plan(const StitchedPlan& plan, const Query& q, const LogSnapshot& log) {
  GroupCounts total;
  const EventWindow& w = plan.window;
  for (const auto& part : plan.parts) {
    GroupCounts part_counts;
    bool done = false;
    if (part.candidate >= 0) {
      const Candidate& cand = plan.candidates[part.candidate];
      auto s = cand.structure.lock();
      if (s) {
        switch (part.path) {
          case PathKind::IndexProbe:
            if (auto* idx = dynamic_cast<const HashIndexStructure*>(s.get())) {
              part_counts = probe_part(part, *idx, q, w, log);
              done = true;
            }
            break;
          case PathKind::FilteredScan:
            if (auto* pfl = dynamic_cast<const PreFilteredLog*>(s.get())) {
              part_counts = filtered_part(part, *pfl, q, w, log);
              done = true;
            }
            break;
          case PathKind::AggregateRead:
            if (auto* agg = dynamic_cast<const MaterializedAggregate*>(s.get())) {
              part_counts = aggregate_part(part, *agg, cand, q, w, log);
              done = true;
            }
            break;
          case PathKind::RawScan:
            break;
        }
      }
    }
    if (!done) part_counts = raw_scan(q, w, log, part.range);
    merge_into(total, part_counts);
  }
  return total;
}

TimestampMs QueryEngine::now() const { return log_.latest_event_ts().value_or(0); }

QueryResult QueryEngine::run(const Query& q, PlanMode mode) const {
  const auto t0 = std::chrono::steady_clock::now();
  QueryResult r;
  r.now = now();
  LogSnapshot snap = log_.snapshot();
  r.snapshot_hi = snap.hi();
  const EventWindow w = q.window.resolve(r.now);
  const OffsetRange extent = snap.window_extent(w);
  if (mode == PlanMode::RawOnly) {
    r.plan = raw_plan(w, extent, cm_);
  } else {
    RegistrySnapshot reg = registry_.snapshot();
    r.plan = plan_query(q, w, extent, gather_candidates(q, reg, extent), LiveStatistics{}, cm_);
  }
  r.plan_ms = ms_since(t0);
  r.rows = top_k(execute_plan(r.plan, q, snap), q.top_k);
  r.latency_ms = ms_since(t0);
  return r;
}

json QueryResult::to_json() const {
  json rows_j = json::array();
  for (const auto& row : rows) rows_j.push_back({{"key", row.key}, {"count", row.count}});
  return {{"rows", rows_j},         {"plan", plan.to_json()}, {"snapshot_hi", snapshot_hi},
          {"now", now},             {"plan_ms", plan_ms},     {"latency_ms", latency_ms}};
}

}  // namespace fluid
