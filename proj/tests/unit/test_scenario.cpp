// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "fluid/json_probe.hpp"
#include "fluid/scenario/scenario.hpp"
#include "helpers.hpp"

using namespace fluid;
using nlohmann::json;

namespace {

GeneratorParams small_params() {
  GeneratorParams p;
  p.hours = 6;
  p.rate_curve = {300, 500, 800, 800, 400, 200};
  p.repos = 400;
  p.actors = 1000;
  p.orgs = 50;
  p.spike_repo_rank = 40;
  p.spike_from_hour = 1;
  p.spike_to_hour = 4;
  p.spam_actor_rank = 90;
  p.spam_share = 0.01;
  return p;
}

std::vector<std::string> all_lines(GeneratorParams p) {
  EventGenerator g(std::move(p));
  std::vector<std::string> out;
  std::string line;
  while (g.next(line)) out.push_back(line);
  return out;
}

json small_scenario() {
  json window = {{"relative_hours", 2}};
  json q1 = {{"window", window},
             {"predicates", json::array({{{"field", "type"}, {"eq", "PullRequestEvent"}}})},
             {"group_by", "repo.name"},
             {"top_k", 3}};
  json q2 = {{"window", window},
             {"predicates", json::array({{{"field", "repo.name"}, {"eq", "$S"}}})},
             {"group_by", "actor.login"},
             {"top_k", 5}};
  json pf = to_json(make_prefilter_spec("pf", {test::eq("repo.name", "$S")}, {"actor.login"}));
  json tl = json::array();
  for (double h : {2.0, 4.0}) {
    tl.push_back({{"at_hours", h}, {"action", "query"}, {"name", "Q1"}, {"query", q1}, {"bind", {{"S", 0}}}});
    tl.push_back({{"at_hours", h + 0.05}, {"action", "start_dpr"}, {"spec", pf}});
    tl.push_back({{"at_hours", h + 0.3}, {"action", "query"}, {"name", "Q2"}, {"query", q2}});
    tl.push_back({{"at_hours", h + 0.6}, {"action", "query"}, {"name", "Q2"}, {"query", q2}});
    tl.push_back({{"at_hours", h + 1.0}, {"action", "stop_dpr"}, {"id", "pf"}});
  }
  return {{"name", "small"},
          {"generator", small_params().to_json()},
          {"manager", {{"tick_s", 60}, {"min_active_s", 30}, {"half_life_s", 1800}}},
          {"timeline", tl}};
}

}  // namespace

TEST_CASE("generator is deterministic and seed-sensitive") {
  const auto a = all_lines(small_params());
  const auto b = all_lines(small_params());
  CHECK(a == b);
  auto p = small_params();
  p.seed = 43;
  CHECK(all_lines(p) != a);
}

TEST_CASE("generator: exact hourly counts, valid JSON, bounded disorder") {
  const auto p = small_params();
  const auto lines = all_lines(p);
  REQUIRE(lines.size() == p.total_events());
  std::vector<std::uint64_t> per_hour(p.hours, 0);
  TimestampMs max_seen = 0;
  for (const auto& l : lines) {
    const json j = json::parse(l);
    CHECK(j.contains("id"));
    CHECK(j["actor"]["login"].is_string());
    const auto ts = parse_iso8601_ms(j["created_at"].get<std::string>());
    REQUIRE(ts);
    const auto h = (*ts - p.start_ms) / 3'600'000;
    REQUIRE(h >= 0);
    REQUIRE(h < p.hours);
    ++per_hour[h];
    // Out of order by at most the disorder bound plus second truncation.
    CHECK(*ts >= max_seen - p.disorder_ms - 1000);
    max_seen = std::max(max_seen, *ts);
  }
  for (int h = 0; h < p.hours; ++h) CHECK(per_hour[h] == static_cast<std::uint64_t>(p.rate_curve[h]));
}

TEST_CASE("generator: planted spike repo and spam actor") {
  const auto p = small_params();
  EventGenerator g(p);
  const auto planted = g.planted();
  std::map<std::string, int> pr_in_spike, pr_outside;
  int spam_comments = 0;
  std::string line;
  while (g.next(line)) {
    const json j = json::parse(line);
    const auto h = (*parse_iso8601_ms(j["created_at"].get<std::string>()) - p.start_ms) / 3'600'000;
    if (j["type"] == "PullRequestEvent") {
      auto& m = h >= p.spike_from_hour && h < p.spike_to_hour ? pr_in_spike : pr_outside;
      ++m[j["repo"]["name"]];
    }
    // The spam actor also shows up through ordinary traffic; count only its
    // comments on the planted repo.
    if (j["actor"]["login"] == planted.spam_actor.login && j["type"] == "IssueCommentEvent" &&
        j["repo"]["name"] == planted.spam_repo.name)
      ++spam_comments;
  }
  auto top = [](const std::map<std::string, int>& m) {
    return std::max_element(m.begin(), m.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
  };
  CHECK(top(pr_in_spike) == planted.spike_repo.name);
  CHECK(pr_outside[planted.spike_repo.name] < pr_in_spike[planted.spike_repo.name] / 4);
  // Expected about spam_share x total = 30.
  CHECK(spam_comments >= 15);
}

TEST_CASE("rate curves") {
  CHECK(parse_rate_curve("flat:5") == std::vector<double>{5});
  CHECK(parse_rate_curve("1,2,3") == std::vector<double>{1, 2, 3});
  const auto d = parse_rate_curve("diurnal:1000");
  REQUIRE(d.size() == 24);
  CHECK(*std::max_element(d.begin(), d.end()) == 1000);
  CHECK(std::count(d.begin(), d.end(), 1000.0) == 3);
  CHECK_THROWS_AS(parse_rate_curve("diurnal:x"), Error);
  CHECK_THROWS_AS(parse_rate_curve("1,-2"), Error);
  const auto p = GeneratorParams::from_json(small_params().to_json());
  CHECK(p.to_json() == small_params().to_json());
}

TEST_CASE("scenario spec validation") {
  CHECK_NOTHROW(ScenarioSpec::from_json(small_scenario()));
  json bad = small_scenario();
  bad["timeline"].push_back({{"at_hours", 1}, {"action", "dance"}});
  CHECK_THROWS_AS(ScenarioSpec::from_json(bad), Error);
  bad = small_scenario();
  bad["fusion_level"] = 3;
  CHECK_THROWS_AS(ScenarioSpec::from_json(bad), Error);
  const auto s = ScenarioSpec::from_json(small_scenario());
  CHECK(std::is_sorted(s.timeline.begin(), s.timeline.end(),
                       [](auto& a, auto& b) { return a.at_hours < b.at_hours; }));
  CHECK(s.manager.tick_period_ms == 60'000);
}

TEST_CASE("budget derivation leaves no slack in the busiest hours") {
  StrategyReport base;
  const std::uint64_t recs[] = {100, 400, 400, 200};
  for (int i = 0; i < 4; ++i) base.intervals.push_back({i, i * 3'600'000LL, recs[i], 9.0 * recs[i], 0, 0, 0, 0});
  const auto t = derive_budget(base, 3600);
  CHECK(t.at(0) == doctest::Approx((3600 - 900) / 100.0));
  CHECK(t.at(3'600'000) == 0);
  CHECK(t.at(7'200'000) == 0);
  CHECK(t.at(10'800'000) == doctest::Approx((3600 - 1800) / 200.0));
}

TEST_CASE("scenario replay: answers identical across strategies, fluid-auto within budget") {
  const auto s = ScenarioSpec::from_json(small_scenario());
  RunOptions ro;
  ro.speedup = 0;
  ro.strategies = {Strategy::Baseline, Strategy::FluidManual, Strategy::FluidAuto, Strategy::Excessive};
  const auto rep = run_scenario(s, ro);
  REQUIRE(rep.strategies.size() == 4);
  CHECK(rep.answers_identical());

  const auto& base = rep.strategies[0];
  REQUIRE(base.queries.size() == 6);
  CHECK(base.records == small_params().total_events());
  // The spike repo leads Q1 while the spike is on.
  CHECK(base.queries[0].rows.at(0).key == EventGenerator(small_params()).planted().spike_repo.name);

  for (const auto& r : rep.strategies) {
    CHECK(r.intervals.size() == 6);
    if (r.strategy == Strategy::Baseline || r.strategy == Strategy::FluidAuto)
      CHECK(r.provision_violations().empty());
    if (r.strategy == Strategy::FluidAuto) CHECK(r.budget_violations().empty());
    if (r.strategy == Strategy::Excessive) CHECK(r.max_utilization() > 1.5);
  }
  CHECK(rep.utilization_csv().rfind("strategy,interval,", 0) == 0);
  CHECK(rep.queries_csv().rfind("strategy,at_hours,", 0) == 0);
}
