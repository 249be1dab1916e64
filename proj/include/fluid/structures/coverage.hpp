// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <initializer_list>
#include <vector>

#include "fluid/stream/raw_log.hpp"
#include "fluid/types.hpp"

namespace fluid {

// Normalized set of offset intervals: sorted, pairwise disjoint, non-empty,
// and non-adjacent (touching intervals are merged).
class Coverage {
 public:
  Coverage() = default;
  explicit Coverage(OffsetRange r);
  Coverage(std::initializer_list<OffsetRange> rs);
  static Coverage from(std::vector<OffsetRange> rs);

  const std::vector<OffsetRange>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  Offset size() const;
  bool contains(Offset o) const;
  bool contains(const OffsetRange& r) const;
  // Smallest range enclosing everything; {0,0} when empty.
  OffsetRange hull() const;

  Coverage intersect(const Coverage& other) const;
  Coverage subtract(const Coverage& other) const;
  Coverage unite(const Coverage& other) const;
  Coverage clip(const OffsetRange& r) const { return intersect(Coverage(r)); }

  friend bool operator==(const Coverage&, const Coverage&) = default;

 private:
  std::vector<OffsetRange> intervals_;
};

struct CoverageBounds {
  OffsetRange range;
  bool has_events = false;
  TimestampMs min_event_ts = 0;
  TimestampMs max_event_ts = 0;
};

// Event-time bounds per coverage interval, taken from the footers of the
// segments each interval touches (conservative: may be wider than exact).
std::vector<CoverageBounds> event_time_bounds(const Coverage& c, const LogSnapshot& log);

}  // namespace fluid
