// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/dpr/registry.hpp"
#include "fluid/query/query.hpp"
#include "fluid/structures/coverage.hpp"
#include "fluid/structures/structures.hpp"

namespace fluid {

struct CostModel {
  double raw_scan = 6.0;         // per record: parse + filter
  double filtered_scan = 1.0;    // per pre-filtered entry
  double index_probe_fixed = 5.0;
  double per_posting = 0.2;      // per posting, also per raw fetch from a pre-filtered entry
  double aggregate_read = 2.0;   // per closed bucket read
  double stitch = 1.0;           // per plan part

  nlohmann::json to_json() const;
};

enum class PathKind { RawScan, IndexProbe, FilteredScan, AggregateRead };

const char* path_kind_name(PathKind k);

// A structure the planner may use, possibly hypothetical (no data yet).
struct Candidate {
  std::string structure_id;
  StructureDescriptor descriptor;
  Coverage coverage;                 // pinned at planning time
  std::weak_ptr<Structure> structure;
};

// Which path a structure offers for the query, if any. A structure is only
// usable when its built-in filters are implied by the query predicates; an
// aggregate additionally needs the same group-by and an equivalent filter.
std::optional<PathKind> applicable_path(const StructureDescriptor& d, const Query& q);

// Inputs to per-segment costs. The live implementation reads the structures;
// the manager supplies projected numbers for structures that don't exist yet.
class PlanStatistics {
 public:
  virtual ~PlanStatistics() = default;
  virtual double records(OffsetRange r) const = 0;
  virtual double postings(const Candidate& c, const std::string& value, OffsetRange r) const = 0;
  virtual double filtered_entries(const Candidate& c, OffsetRange r) const = 0;
  struct AggregateSplit {
    double buckets = 0;
    double leftover_records = 0;
  };
  virtual AggregateSplit aggregate_split(const Candidate& c, OffsetRange r, const EventWindow& w) const = 0;
};

class LiveStatistics : public PlanStatistics {
 public:
  double records(OffsetRange r) const override { return static_cast<double>(r.size()); }
  double postings(const Candidate& c, const std::string& value, OffsetRange r) const override;
  double filtered_entries(const Candidate& c, OffsetRange r) const override;
  AggregateSplit aggregate_split(const Candidate& c, OffsetRange r, const EventWindow& w) const override;
};

// Closed buckets of `agg` lying inside `r`, inside `covered`, and whose
// counted records all fall in `w`. Caller holds the read lock.
std::vector<std::uint64_t> usable_buckets(const MaterializedAggregate& agg, OffsetRange r, const Coverage& covered,
                                          const EventWindow& w);

struct PlanPart {
  OffsetRange range;
  PathKind path = PathKind::RawScan;
  int candidate = -1;          // index into StitchedPlan::candidates
  std::string lookup_value;    // IndexProbe key
  bool fetch_raw = false;      // FilteredScan needs fields not stored
  double est_cost = 0;         // excluding stitch
};

struct StitchedPlan {
  EventWindow window;
  OffsetRange extent;                     // offsets that can hold window events
  std::vector<OffsetRange> segments;      // atomic segments
  std::vector<PlanPart> parts;            // coalesced, ordered, tiling extent
  std::vector<Candidate> candidates;
  double est_cost = 0;                    // sum(parts) + stitch * parts
  double raw_cost = 0;                    // all-RawScan alternative

  nlohmann::json to_json() const;
};

// Cuts `extent` at every coverage boundary inside it.
std::vector<OffsetRange> decompose(OffsetRange extent, std::span<const Coverage> coverages);

// Chooses a path per atomic segment minimizing sum of costs plus stitch cost
// per part (dynamic programming over segments; a part continues while the
// same path is kept). Always includes the all-RawScan assignment.
StitchedPlan plan_query(const Query& q, const EventWindow& w, OffsetRange extent, std::vector<Candidate> candidates,
                        const PlanStatistics& stats, const CostModel& cm);

// Candidates for `q` from a registry snapshot, coverage clipped to `extent`.
std::vector<Candidate> gather_candidates(const Query& q, const RegistrySnapshot& reg, OffsetRange extent);

// Plan that uses RawScan for the whole extent.
StitchedPlan raw_plan(const EventWindow& w, OffsetRange extent, const CostModel& cm);

}  // namespace fluid
