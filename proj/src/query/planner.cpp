// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/query/planner.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace fluid {

using nlohmann::json;

json CostModel::to_json() const {
  return {{"raw_scan", raw_scan},       {"filtered_scan", filtered_scan}, {"index_probe_fixed", index_probe_fixed},
          {"per_posting", per_posting}, {"aggregate_read", aggregate_read}, {"stitch", stitch}};
}

const char* path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::RawScan: return "raw_scan";
    case PathKind::IndexProbe: return "index_probe";
    case PathKind::FilteredScan: return "filtered_scan";
    case PathKind::AggregateRead: return "aggregate_read";
  }
  return "?";
}

std::optional<PathKind> applicable_path(const StructureDescriptor& d, const Query& q) {
  if (d.derived) return std::nullopt;
  for (const auto& f : d.filters)
    if (!implied_by(f, q.predicates)) return std::nullopt;
  switch (d.kind) {
    case StructureKind::HashIndex:
      for (const auto& p : q.predicates)
        if (p.op == CompareOp::Eq && p.field == d.field) return PathKind::IndexProbe;
      return std::nullopt;
    case StructureKind::PreFilteredLog:
      return PathKind::FilteredScan;
    case StructureKind::MaterializedAggregate:
      if (d.group_by != q.group_by) return std::nullopt;
      for (const auto& p : q.predicates)
        if (!implied_by(p, d.filters)) return std::nullopt;
      return PathKind::AggregateRead;
  }
  return std::nullopt;
}

namespace {

template <class T>
std::shared_ptr<const T> pin(const Candidate& c) {
  return std::dynamic_pointer_cast<const T>(c.structure.lock());
}

std::string index_value(const Candidate& c, const Query& q) {
  for (const auto& p : q.predicates)
    if (p.op == CompareOp::Eq && p.field == c.descriptor.field) return p.value;
  return {};
}

// Stored columns cover the group-by and every predicate not guaranteed by
// the structure's own filter.
bool needs_raw_fetch(const StructureDescriptor& d, const Query& q) {
  auto stored = [&](const std::string& f) {
    return std::find(d.stored_fields.begin(), d.stored_fields.end(), f) != d.stored_fields.end();
  };
  if (!stored(q.group_by)) return true;
  for (const auto& p : q.predicates)
    if (!implied_by(p, d.filters) && !stored(p.field)) return true;
  return false;
}

}  // namespace

double LiveStatistics::postings(const Candidate& c, const std::string& value, OffsetRange r) const {
  auto idx = pin<HashIndexStructure>(c);
  if (!idx) return static_cast<double>(r.size());
  auto lk = idx->read_lock();
  return static_cast<double>(idx->count_in(value, r));
}

double LiveStatistics::filtered_entries(const Candidate& c, OffsetRange r) const {
  auto pfl = pin<PreFilteredLog>(c);
  if (!pfl) return static_cast<double>(r.size());
  auto lk = pfl->read_lock();
  return static_cast<double>(pfl->count_in(r));
}

PlanStatistics::AggregateSplit LiveStatistics::aggregate_split(const Candidate& c, OffsetRange r,
                                                               const EventWindow& w) const {
  auto agg = pin<MaterializedAggregate>(c);
  if (!agg) return {0, static_cast<double>(r.size())};
  auto lk = agg->read_lock();
  auto ks = usable_buckets(*agg, r, c.coverage, w);
  return {static_cast<double>(ks.size()),
          static_cast<double>(r.size() - static_cast<Offset>(ks.size()) * agg->bucket_width())};
}

std::vector<std::uint64_t> usable_buckets(const MaterializedAggregate& agg, OffsetRange r, const Coverage& covered,
                                          const EventWindow& w) {
  std::vector<std::uint64_t> out;
  const std::uint64_t width = agg.bucket_width();
  for (std::uint64_t k = (r.lo + width - 1) / width; (k + 1) * width <= r.hi; ++k) {
    const OffsetRange br = agg.bucket_range(k);
    if (!covered.contains(br)) continue;
    const auto* b = agg.bucket(k);
    if (b && (!w.contains(b->min_event_ts) || !w.contains(b->max_event_ts))) continue;
    out.push_back(k);
  }
  return out;
}

std::vector<OffsetRange> decompose(OffsetRange extent, std::span<const Coverage> coverages) {
  std::vector<OffsetRange> out;
  if (extent.empty()) return out;
  std::set<Offset> cuts{extent.lo, extent.hi};
  for (const auto& c : coverages) {
    for (const auto& r : c.intervals()) {
      if (r.lo > extent.lo && r.lo < extent.hi) cuts.insert(r.lo);
      if (r.hi > extent.lo && r.hi < extent.hi) cuts.insert(r.hi);
    }
  }
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) out.push_back({*it, *std::next(it)});
  return out;
}

StitchedPlan raw_plan(const EventWindow& w, OffsetRange extent, const CostModel& cm) {
  StitchedPlan p;
  p.window = w;
  p.extent = extent;
  if (!extent.empty()) {
    p.segments = {extent};
    PlanPart part;
    part.range = extent;
    part.est_cost = cm.raw_scan * static_cast<double>(extent.size());
    p.parts.push_back(part);
    p.est_cost = part.est_cost + cm.stitch;
  }
  p.raw_cost = p.est_cost;
  return p;
}

StitchedPlan plan_query(const Query& q, const EventWindow& w, OffsetRange extent, std::vector<Candidate> candidates,
                        const PlanStatistics& stats, const CostModel& cm) {
  StitchedPlan plan;
  plan.window = w;
  plan.extent = extent;
  plan.candidates = std::move(candidates);
  plan.raw_cost = extent.empty() ? 0.0 : cm.raw_scan * stats.records(extent) + cm.stitch;
  if (extent.empty()) return plan;

  std::vector<Coverage> covs;
  for (const auto& c : plan.candidates) covs.push_back(c.coverage);
  plan.segments = decompose(extent, covs);

  struct Option {
    PathKind kind;
    int cand;
    double start;  // cost when this segment opens a part
    double cont;   // cost when it extends the previous segment's part
  };
  std::vector<std::vector<Option>> opts(plan.segments.size());
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const OffsetRange s = plan.segments[i];
    const double raw = cm.raw_scan * stats.records(s);
    opts[i].push_back({PathKind::RawScan, -1, raw, raw});
    for (std::size_t c = 0; c < plan.candidates.size(); ++c) {
      const Candidate& cand = plan.candidates[c];
      if (!cand.coverage.contains(s)) continue;
      auto kind = applicable_path(cand.descriptor, q);
      if (!kind) continue;
      double cont = 0, start = 0;
      switch (*kind) {
        case PathKind::IndexProbe:
          cont = cm.per_posting * stats.postings(cand, index_value(cand, q), s);
          start = cont + cm.index_probe_fixed;
          break;
        case PathKind::FilteredScan: {
          const double per = cm.filtered_scan + (needs_raw_fetch(cand.descriptor, q) ? cm.per_posting : 0.0);
          cont = start = per * stats.filtered_entries(cand, s);
          break;
        }
        case PathKind::AggregateRead: {
          auto split = stats.aggregate_split(cand, s, w);
          cont = start = cm.aggregate_read * split.buckets + cm.raw_scan * split.leftover_records;
          break;
        }
        case PathKind::RawScan:
          break;
      }
      opts[i].push_back({*kind, static_cast<int>(c), start, cont});
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(opts.size());
  std::vector<std::vector<int>> back(opts.size());
  for (std::size_t i = 0; i < opts.size(); ++i) {
    best[i].assign(opts[i].size(), inf);
    back[i].assign(opts[i].size(), -1);
    for (std::size_t j = 0; j < opts[i].size(); ++j) {
      const Option& o = opts[i][j];
      if (i == 0) {
        best[i][j] = o.start + cm.stitch;
        continue;
      }
      for (std::size_t p = 0; p < opts[i - 1].size(); ++p) {
        const Option& po = opts[i - 1][p];
        const bool same = po.kind == o.kind && po.cand == o.cand;
        const double v = best[i - 1][p] + (same ? o.cont : o.start + cm.stitch);
        if (v < best[i][j]) {
          best[i][j] = v;
          back[i][j] = static_cast<int>(p);
        }
      }
    }
  }

  const std::size_t last = opts.size() - 1;
  int j = static_cast<int>(std::min_element(best[last].begin(), best[last].end()) - best[last].begin());
  plan.est_cost = best[last][j];
  std::vector<int> choice(opts.size());
  for (std::size_t i = opts.size(); i-- > 0;) {
    choice[i] = j;
    j = back[i][j];
  }

  for (std::size_t i = 0; i < opts.size(); ++i) {
    const Option& o = opts[i][choice[i]];
    const bool extend = !plan.parts.empty() && plan.parts.back().path == o.kind && plan.parts.back().candidate == o.cand;
    if (extend) {
      plan.parts.back().range.hi = plan.segments[i].hi;
      plan.parts.back().est_cost += o.cont;
      continue;
    }
    PlanPart part;
    part.range = plan.segments[i];
    part.path = o.kind;
    part.candidate = o.cand;
    part.est_cost = o.start;
    if (o.cand >= 0) {
      const Candidate& c = plan.candidates[o.cand];
      if (o.kind == PathKind::IndexProbe) part.lookup_value = index_value(c, q);
      if (o.kind == PathKind::FilteredScan) part.fetch_raw = needs_raw_fetch(c.descriptor, q);
    }
    plan.parts.push_back(std::move(part));
  }
  return plan;
}

std::vector<Candidate> gather_candidates(const Query& q, const RegistrySnapshot& reg, OffsetRange extent) {
  std::vector<Candidate> out;
  for (const RegistryEntry* e : reg.live()) {
    if (!applicable_path(e->descriptor, q)) continue;
    Coverage cov = e->coverage().clip(extent);
    if (cov.empty()) continue;
    out.push_back({e->structure_id, e->descriptor, std::move(cov), e->structure});
  }
  return out;
}

json StitchedPlan::to_json() const {
  json j;
  j["window"] = {{"from", window.from}, {"to", window.to}};
  j["extent"] = {extent.lo, extent.hi};
  j["segments"] = segments.size();
  json parts_j = json::array();
  for (const auto& p : parts) {
    json pj;
    pj["range"] = {p.range.lo, p.range.hi};
    pj["path"] = path_kind_name(p.path);
    if (p.candidate >= 0) pj["structure_id"] = candidates[p.candidate].structure_id;
    if (!p.lookup_value.empty()) pj["lookup_value"] = p.lookup_value;
    if (p.path == PathKind::FilteredScan) pj["fetch_raw"] = p.fetch_raw;
    pj["est_cost"] = p.est_cost;
    pj["cost_share"] = est_cost > 0 ? p.est_cost / est_cost : 0.0;
    parts_j.push_back(std::move(pj));
  }
  j["parts"] = parts_j;
  j["est_cost"] = est_cost;
  j["raw_cost"] = raw_cost;
  return j;
}

}  // namespace fluid
