// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/structures/coverage.hpp"

#include <algorithm>

namespace fluid {

Coverage::Coverage(OffsetRange r) {
  if (!r.empty()) intervals_.push_back(r);
}

Coverage::Coverage(std::initializer_list<OffsetRange> rs) : Coverage(from(std::vector<OffsetRange>(rs))) {}

Coverage Coverage::from(std::vector<OffsetRange> rs) {
  std::erase_if(rs, [](const OffsetRange& r) { return r.empty(); });
  std::sort(rs.begin(), rs.end(), [](const OffsetRange& a, const OffsetRange& b) { return a.lo < b.lo; });
  Coverage out;
  for (const auto& r : rs) {
    if (!out.intervals_.empty() && r.lo <= out.intervals_.back().hi) {
      out.intervals_.back().hi = std::max(out.intervals_.back().hi, r.hi);
    } else {
      out.intervals_.push_back(r);
    }
  }
  return out;
}

Offset Coverage::size() const {
  Offset n = 0;
  for (const auto& r : intervals_) n += r.size();
  return n;
}

bool Coverage::contains(Offset o) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), o,
                             [](Offset v, const OffsetRange& r) { return v < r.lo; });
  return it != intervals_.begin() && std::prev(it)->contains(o);
}

bool Coverage::contains(const OffsetRange& r) const {
  if (r.empty()) return true;
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), r.lo,
                             [](Offset v, const OffsetRange& x) { return v < x.lo; });
  return it != intervals_.begin() && std::prev(it)->contains(r);
}

OffsetRange Coverage::hull() const {
  if (intervals_.empty()) return {0, 0};
  return {intervals_.front().lo, intervals_.back().hi};
}

Coverage Coverage::intersect(const Coverage& other) const {
  Coverage out;
  std::size_t i = 0, j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const OffsetRange r = intervals_[i].intersect(other.intervals_[j]);
    if (!r.empty()) out.intervals_.push_back(r);
    if (intervals_[i].hi < other.intervals_[j].hi) ++i;
    else ++j;
  }
  return out;
}

Coverage Coverage::subtract(const Coverage& other) const {
  Coverage out;
  std::size_t j = 0;
  for (OffsetRange cur : intervals_) {
    while (j < other.intervals_.size() && other.intervals_[j].hi <= cur.lo) ++j;
    std::size_t k = j;
    while (!cur.empty() && k < other.intervals_.size() && other.intervals_[k].lo < cur.hi) {
      const OffsetRange& cut = other.intervals_[k];
      if (cut.lo > cur.lo) out.intervals_.push_back({cur.lo, cut.lo});
      cur.lo = std::max(cur.lo, cut.hi);
      ++k;
    }
    if (!cur.empty()) out.intervals_.push_back(cur);
  }
  return out;
}

Coverage Coverage::unite(const Coverage& other) const {
  std::vector<OffsetRange> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return from(std::move(all));
}

std::vector<CoverageBounds> event_time_bounds(const Coverage& c, const LogSnapshot& log) {
  std::vector<CoverageBounds> out;
  for (const auto& r : c.intervals()) {
    CoverageBounds b{r};
    for (std::size_t i = log.segment_of(r.lo); i < log.segment_count(); ++i) {
      const Segment& s = log.segment(i);
      if (s.lo() >= r.hi) break;
      if (log.visible(i) == 0) continue;
      if (!b.has_events) {
        b.min_event_ts = s.min_event_ts();
        b.max_event_ts = s.max_event_ts();
        b.has_events = true;
      } else {
        b.min_event_ts = std::min(b.min_event_ts, s.min_event_ts());
        b.max_event_ts = std::max(b.max_event_ts, s.max_event_ts());
      }
    }
    out.push_back(b);
  }
  return out;
}

}  // namespace fluid
