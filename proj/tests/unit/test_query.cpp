// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "fluid/engine.hpp"
#include "fluid/query/oracle.hpp"
#include "helpers.hpp"

using namespace fluid;
using nlohmann::json;
using test::eq;

namespace {

struct Rig {
  Engine engine{[] {
    EngineOptions o;
    o.clock = [] { return TimestampMs{0}; };
    o.log.segment_records = 256;
    return o;
  }()};
  std::vector<std::string> ev = test::events(31, 4, 2500);
  std::size_t next = 0;

  void ingest(std::size_t n) {
    for (std::size_t k = 0; k < n && next < ev.size(); ++k) engine.ingest(ev[next++], 0);
    engine.runtime().pump();
  }
  TimestampMs t0() const { return 1709251200000; }
};

}  // namespace

TEST_CASE("query json parsing") {
  const auto q = query_from_json(json::parse(
      R"({"window":{"relative_hours":2},"predicates":[{"field":"type","eq":"PushEvent"}],"group_by":"repo.name","agg":"count","top_k":3})"));
  CHECK(q.top_k == 3);
  CHECK(q.predicates.size() == 1);
  const auto w = q.window.resolve(10'000'000);
  CHECK(w.from == 10'000'000 - 7'200'000 + 1);
  CHECK(w.to == 10'000'001);
  const auto a = query_from_json(json::parse(
      R"({"window":{"abs_range":{"from":"2024-03-01T00:00:00Z","to":1709254800000}},"group_by":"type"})"));
  CHECK(a.window.resolve(0) == EventWindow{1709251200000, 1709254800000});
  for (const char* bad : {R"({"group_by":"type"})", R"({"window":{"relative_hours":1},"group_by":"type","agg":"sum"})",
                          R"({"window":{"relative_hours":1},"group_by":"type","top_k":0})",
                          R"({"window":{"relative_hours":1}})"}) {
    try {
      query_from_json(json::parse(bad));
      FAIL(bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidArgument);
    }
  }
  CHECK(q.template_key() == query_from_json(json::parse(
                                R"({"window":{"relative_hours":2},"predicates":[{"field":"type","eq":"WatchEvent"}],"group_by":"repo.name","top_k":3})"))
                                .template_key());
}

TEST_CASE("applicable paths") {
  const auto q = test::query({eq("repo.name", "r"), eq("type", "PushEvent")}, "actor.login");
  StructureDescriptor idx;
  idx.field = "repo.name";
  CHECK(applicable_path(idx, q) == PathKind::IndexProbe);
  idx.filters = {eq("type", "WatchEvent")};
  CHECK_FALSE(applicable_path(idx, q));
  StructureDescriptor pf;
  pf.kind = StructureKind::PreFilteredLog;
  pf.filters = {eq("type", "PushEvent")};
  pf.stored_fields = {"actor.login"};
  CHECK(applicable_path(pf, q) == PathKind::FilteredScan);
  StructureDescriptor agg;
  agg.kind = StructureKind::MaterializedAggregate;
  agg.group_by = "actor.login";
  agg.filters = {eq("repo.name", "r"), eq("type", "PushEvent")};
  CHECK(applicable_path(agg, q) == PathKind::AggregateRead);
  agg.filters = {eq("type", "PushEvent")};
  CHECK_FALSE(applicable_path(agg, q));
}

TEST_CASE("decompose cuts at every coverage boundary") {
  const Coverage a{{10, 50}}, b{{30, 80}, {90, 95}};
  const Coverage cs[] = {a, b};
  const auto segs = decompose({0, 100}, cs);
  const std::vector<OffsetRange> want = {{0, 10}, {10, 30}, {30, 50}, {50, 80}, {80, 90}, {90, 95}, {95, 100}};
  CHECK(segs == want);
}

TEST_CASE("partial index coverage stitches index and raw parts") {
  Rig r;
  r.ingest(4000);
  r.engine.runtime().start(make_index_spec("by_repo", "repo.name"));
  r.ingest(6000);
  const auto& ev = r.ev;
  (void)ev;
  const auto q = test::query({eq("repo.name", "org10/repo50")}, "actor.login", 5);
  const auto res = r.engine.queries().run(q);
  REQUIRE(res.plan.parts.size() == 2);
  CHECK(res.plan.parts[0].path == PathKind::RawScan);
  CHECK(res.plan.parts[1].path == PathKind::IndexProbe);
  CHECK(res.plan.parts[0].range.hi == res.plan.parts[1].range.lo);
  CHECK(res.plan.est_cost < res.plan.raw_cost);
  CHECK(res.rows == raw_oracle(q, EventWindow::all(), r.engine.log().snapshot()));
  CHECK(res.to_json()["plan"]["parts"].size() == 2);
}

TEST_CASE("stitched answers equal the oracle on random queries") {
  Rig r;
  r.ingest(1500);
  auto& rt = r.engine.runtime();
  rt.start(make_index_spec("i1", "repo.name"));
  rt.start(make_index_spec("i2", "actor.login", {eq("type", "IssueCommentEvent")}));
  r.ingest(2000);
  rt.start(make_prefilter_spec("p1", {eq("type", "PullRequestEvent")}, {"repo.name"}));
  rt.start(make_aggregate_spec("a1", "repo.name", {eq("type", "PushEvent")}, 64));
  r.ingest(2500);
  rt.stop("i1");
  r.ingest(2000);

  std::mt19937_64 rng(12);
  const auto log = r.engine.log().snapshot();
  std::vector<std::string> repos, actors;
  for (std::size_t i = 0; i < 200; ++i) {
    repos.push_back(*extract_field(r.ev[i * 7], "repo.name"));
    actors.push_back(*extract_field(r.ev[i * 11], "actor.login"));
  }
  const std::vector<std::string> types = {"PushEvent", "PullRequestEvent", "IssueCommentEvent", "WatchEvent"};
  const std::vector<std::string> groups = {"repo.name", "actor.login", "type", "payload.action"};
  std::map<PathKind, int> used;
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<FilterPredicate> preds;
    if (rng() % 2) preds.push_back(eq("type", types[rng() % types.size()]));
    if (rng() % 2) preds.push_back(eq("repo.name", repos[rng() % repos.size()]));
    if (rng() % 3 == 0) preds.push_back(eq("actor.login", actors[rng() % actors.size()]));
    if (rng() % 7 == 0) preds.push_back({"payload.action", CompareOp::Ne, "opened"});
    const TimestampMs from = r.t0() + static_cast<TimestampMs>(rng() % (4 * 3'600'000));
    const EventWindow w{from, from + static_cast<TimestampMs>(rng() % (3 * 3'600'000))};
    const auto q = test::query(preds, groups[rng() % groups.size()], 1 + rng() % 10, w);
    const auto res = r.engine.queries().run(q);
    for (const auto& p : res.plan.parts) ++used[p.path];
    CHECK(res.rows == raw_oracle(q, w, log));
    CHECK(res.plan.est_cost <= res.plan.raw_cost + 1e-9);
  }
  CHECK(used[PathKind::IndexProbe] > 0);
  CHECK(used[PathKind::FilteredScan] > 0);
  CHECK(used[PathKind::AggregateRead] > 0);
  CHECK(used[PathKind::RawScan] > 0);
}

TEST_CASE("a released structure falls back to raw scanning") {
  Rig r;
  r.engine.runtime().start(make_index_spec("i", "repo.name"));
  r.ingest(3000);
  const auto q = test::query({eq("repo.name", *extract_field(r.ev[0], "repo.name"))}, "actor.login");
  const auto log = r.engine.log().snapshot();
  const auto plan = r.engine.queries().run(q).plan;
  REQUIRE(plan.parts.back().path == PathKind::IndexProbe);
  r.engine.runtime().stop("i");
  r.engine.runtime().pump();
  r.engine.registry().release(r.engine.registry().snapshot().entries()[0].structure_id);
  CHECK(top_k(execute_plan(plan, q, log), q.top_k) == raw_oracle(q, EventWindow::all(), log));
  const auto again = r.engine.queries().run(q);
  CHECK(again.plan.parts.size() == 1);
  CHECK(again.plan.parts[0].path == PathKind::RawScan);
}

TEST_CASE("raw-only mode and empty log") {
  Rig r;
  const auto q = test::query({}, "type");
  CHECK(r.engine.queries().run(q).rows.empty());
  r.ingest(500);
  r.engine.runtime().start(make_index_spec("i", "type"));
  r.ingest(500);
  const auto a = r.engine.queries().run(q, PlanMode::RawOnly);
  CHECK(a.plan.parts.size() == 1);
  CHECK(a.rows == r.engine.queries().run(q).rows);
}

TEST_CASE("escaped needles still match") {
  Engine e;
  e.ingest(R"({"type":"X","body":"say \"hi\"","created_at":"2024-03-01T00:00:00Z"})", 0);
  e.ingest(R"({"type":"X","body":"say \u0022hi\u0022","created_at":"2024-03-01T00:00:01Z"})", 0);
  e.ingest(R"({"type":"Y","body":"say","created_at":"2024-03-01T00:00:02Z"})", 0);
  const auto q = test::query({eq("body", "say \"hi\"")}, "type");
  const auto rows = e.queries().run(q).rows;
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == RankedRow{"X", 2});
}
