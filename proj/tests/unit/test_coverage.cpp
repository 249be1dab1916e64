// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bitset>
#include <random>

#include "fluid/structures/coverage.hpp"

using namespace fluid;

namespace {

constexpr std::size_t kU = 128;
using Bits = std::bitset<kU>;

Bits bits(const Coverage& c) {
  Bits b;
  for (const auto& r : c.intervals())
    for (Offset o = r.lo; o < r.hi; ++o) b.set(o);
  return b;
}

Coverage random_cov(std::mt19937_64& rng) {
  std::vector<OffsetRange> rs;
  const int n = static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) {
    const Offset lo = rng() % kU;
    rs.push_back({lo, std::min<Offset>(kU, lo + rng() % 30)});
  }
  return Coverage::from(rs);
}

bool normalized(const Coverage& c) {
  const auto& v = c.intervals();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].empty()) return false;
    if (i && v[i - 1].hi >= v[i].lo) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("set algebra agrees with a bitset oracle") {
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 3000; ++iter) {
    const Coverage a = random_cov(rng), b = random_cov(rng);
    const Bits A = bits(a), B = bits(b);
    CHECK(normalized(a));
    CHECK(bits(a.unite(b)) == (A | B));
    CHECK(bits(a.intersect(b)) == (A & B));
    CHECK(bits(a.subtract(b)) == (A & ~B));
    CHECK(normalized(a.unite(b)));
    CHECK(normalized(a.intersect(b)));
    CHECK(normalized(a.subtract(b)));
    CHECK(a.size() == A.count());
    const Offset o = rng() % kU;
    CHECK(a.contains(o) == A.test(o));
    const Offset lo = rng() % kU;
    const OffsetRange r{lo, std::min<Offset>(kU, lo + rng() % 20)};
    bool all = true;
    for (Offset k = r.lo; k < r.hi; ++k) all = all && A.test(k);
    CHECK(a.contains(r) == all);
    CHECK(bits(a.clip(r)) == (A & bits(Coverage(r))));
  }
}

TEST_CASE("touching intervals merge, empty ones vanish") {
  Coverage c{{0, 5}, {5, 9}, {12, 12}, {20, 25}};
  REQUIRE(c.intervals().size() == 2);
  CHECK(c.intervals()[0] == OffsetRange{0, 9});
  CHECK(c.hull() == OffsetRange{0, 25});
  CHECK(Coverage().hull() == OffsetRange{0, 0});
  CHECK(Coverage{{3, 3}}.empty());
}

TEST_CASE("event time bounds come from segment footers") {
  LogOptions o;
  o.segment_records = 10;
  o.timestamp_key = "ts";
  RawLog log(o);
  for (int i = 0; i < 40; ++i) log.ingest("{\"ts\":" + std::to_string(1000 + i * 10) + "}", 0);
  const auto b = event_time_bounds(Coverage{{12, 18}, {25, 31}}, log.snapshot());
  REQUIRE(b.size() == 2);
  CHECK(b[0].has_events);
  CHECK(b[0].min_event_ts <= 1120);
  CHECK(b[0].max_event_ts >= 1170);
  CHECK(b[1].min_event_ts <= 1250);
  CHECK(b[1].max_event_ts >= 1300);
}
