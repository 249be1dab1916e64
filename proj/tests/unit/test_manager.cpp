// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <random>

#include "fluid/engine.hpp"
#include "helpers.hpp"

using namespace fluid;

namespace {

std::vector<KnapsackItem> random_items(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> c(0.1, 10.0), v(0.0, 20.0);
  std::vector<KnapsackItem> items(n);
  for (auto& it : items) {
    it.cost = c(rng);
    it.value = v(rng);
  }
  return items;
}

double sum_cost(const std::vector<KnapsackItem>& items, const KnapsackResult& r) {
  double s = 0;
  for (auto i : r.chosen) s += items[i].cost;
  return s;
}

double sum_value(const std::vector<KnapsackItem>& items, const KnapsackResult& r) {
  double s = 0;
  for (auto i : r.chosen) s += items[i].value;
  return s;
}

Query rel_query(std::vector<FilterPredicate> preds, std::string group_by, double hours = 2) {
  Query q;
  q.window.relative_hours = hours;
  q.predicates = std::move(preds);
  q.group_by = std::move(group_by);
  q.top_k = 5;
  return q;
}

struct SimEngine {
  std::atomic<TimestampMs> clock{0};
  std::unique_ptr<Engine> engine;

  explicit SimEngine(ManagerOptions mo = {}) {
    EngineOptions eo;
    eo.manager = mo;
    eo.meter_interval_ms = 3'600'000;
    eo.clock = [this] { return clock.load(); };
    engine = std::make_unique<Engine>(eo);
    const auto ev = test::events(11, 2, 1500);
    TimestampMs t = 0;
    for (const auto& e : ev) {
      // Ingest time tracks event time so rates come out per hour of stream.
      t = std::max(t, probe_timestamp_ms(e, "created_at").value_or(t));
      engine->ingest(e, t);
    }
    clock = t;
    engine->runtime().pump();
  }
  DprManager& m() { return engine->manager(); }
  std::vector<InstanceInfo> manager_running() {
    std::vector<InstanceInfo> out;
    for (auto& i : engine->runtime().instances())
      if (i.running() && i.owner == "manager") out.push_back(i);
    return out;
  }
};

}  // namespace

TEST_CASE("knapsack worked example") {
  const std::vector<KnapsackItem> items = {{5, 10}, {5, 6}, {6, 13}};
  const auto exact = select_exact(items, 10);
  CHECK(exact.chosen == std::vector<std::size_t>{0, 1});
  CHECK(exact.value == doctest::Approx(16));
  const auto brute = select_brute_force(items, 10);
  CHECK(brute.value == doctest::Approx(16));
  const auto greedy = select_greedy(items, 10);
  CHECK(greedy.value >= 13 - 1e-9);
  CHECK(greedy.cost <= 10 + 1e-9);
}

TEST_CASE("knapsack: zero budget and empty input select nothing") {
  const std::vector<KnapsackItem> items = {{1, 5}, {2, 3}};
  CHECK(select_greedy(items, 0).chosen.empty());
  CHECK(select_exact(items, 0).chosen.empty());
  CHECK(select_greedy(std::vector<KnapsackItem>{}, 10).chosen.empty());
  CHECK(select_exact(std::vector<KnapsackItem>{}, 10).value == 0);
}

TEST_CASE("knapsack: random instances against brute force") {
  std::mt19937_64 rng(2024);
  int greedy_optimal = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 14;
    const auto items = random_items(rng, n);
    const double budget = std::uniform_real_distribution<double>(0.0, 40.0)(rng);
    const auto brute = select_brute_force(items, budget);
    const auto exact = select_exact(items, budget);
    const auto greedy = select_greedy(items, budget);

    // Reported totals match the chosen sets; nothing exceeds the budget.
    for (const auto* r : {&brute, &exact, &greedy}) {
      CHECK(sum_cost(items, *r) == doctest::Approx(r->cost));
      CHECK(sum_value(items, *r) == doctest::Approx(r->value));
      CHECK(r->cost <= budget + 1e-9);
      CHECK(std::is_sorted(r->chosen.begin(), r->chosen.end()));
    }
    CHECK(exact.value == doctest::Approx(brute.value));
    CHECK(greedy.value >= 0.5 * brute.value - 1e-9);
    CHECK(greedy.value <= brute.value + 1e-9);
    if (greedy.value >= brute.value - 1e-9) ++greedy_optimal;
  }
  MESSAGE("greedy optimal on " << greedy_optimal << "/500");
}

TEST_CASE("knapsack: larger budget never lowers the optimum") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto items = random_items(rng, 12);
    double prev = 0;
    for (double b = 0; b <= 60; b += 2.5) {
      const double v = select_exact(items, b).value;
      CHECK(v >= prev - 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("workload history decays by half-life") {
  WorkloadHistory h(1000, 8);
  const auto q = rel_query({test::eq("repo.name", "a/b")}, "actor.login");
  h.observe(q, 0);
  CHECK(h.weight(q.template_key(), 0) == doctest::Approx(1.0));
  CHECK(h.weight(q.template_key(), 1000) == doctest::Approx(0.5));
  CHECK(h.weight(q.template_key(), 3000) == doctest::Approx(0.125));
  h.observe(q, 1000);
  CHECK(h.weight(q.template_key(), 1000) == doctest::Approx(1.5));
}

TEST_CASE("forecast: top-m, normalized, constants tracked") {
  WorkloadHistory h(600'000, 2);
  const auto a = rel_query({test::eq("repo.name", "x/1")}, "actor.login");
  const auto a2 = rel_query({test::eq("repo.name", "x/2")}, "actor.login");
  const auto b = rel_query({test::eq("actor.login", "u")}, "repo.name");
  const auto c = rel_query({test::eq("type", "PushEvent")}, "repo.name");
  for (int i = 0; i < 3; ++i) h.observe(a, 0);
  h.observe(a2, 0);
  h.observe(b, 0);
  h.observe(b, 0);
  h.observe(c, 0);
  const auto f = h.forecast(0);
  REQUIRE(f.size() == 2);
  CHECK(f[0].key == a.template_key());
  CHECK(f[1].key == b.template_key());
  CHECK(f[0].weight + f[1].weight == doctest::Approx(1.0));
  CHECK(f[0].weight == doctest::Approx(4.0 / 6.0));
  REQUIRE(f[0].constants.size() == 2);
  CHECK(f[0].constants[0].count == 3);
  CHECK(f[0].constants[0].weight == doctest::Approx(0.75));
  CHECK(f[0].constants[1].weight == doctest::Approx(0.25));
}

TEST_CASE("budget trace: step function and CSV round trip") {
  BudgetTrace t({{1000, 2.5}, {2000, 0.0}, {3000, 4.0}});
  CHECK(t.at(0) == 0);
  CHECK(t.at(999) == 0);
  CHECK(t.at(1000) == 2.5);
  CHECK(t.at(1999) == 2.5);
  CHECK(t.at(2500) == 0);
  CHECK(t.at(1'000'000) == 4.0);
  const auto back = BudgetTrace::parse_csv(t.to_csv());
  CHECK(back.points() == t.points());
  CHECK(t.to_csv().rfind("interval_start_ms,budget_units_per_record\n", 0) == 0);
  CHECK_THROWS_AS(BudgetTrace::parse_csv("interval_start_ms,budget_units_per_record\n10,abc\n"), Error);
  CHECK(BudgetTrace().empty());
}

TEST_CASE("cost estimate on a sample") {
  const auto ev = test::events(5, 1, 500);
  std::vector<RawEvent> sample;
  for (std::size_t i = 0; i < ev.size(); ++i) sample.push_back({static_cast<Offset>(i), 0, 0, ev[i]});
  // An unfiltered index costs parse + sink on every record.
  const double idx = estimate_cost(make_index_spec("i", "repo.name"), sample);
  CHECK(idx == doctest::Approx(7.0));
  // A filter passes only a fraction on to the sink.
  const double pf = estimate_cost(make_prefilter_spec("p", {test::eq("type", "PushEvent")}, {"actor.login"}), sample);
  CHECK(pf > 6.0);
  CHECK(pf < 8.0);
}

TEST_CASE("manager: manual mode tick is a no-op") {
  SimEngine s;
  s.m().set_mode(ManagerMode::Manual);
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}}));
  s.m().observe_query(rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login"), s.clock);
  const auto d = s.m().tick(s.clock);
  CHECK(d.chosen.empty());
  CHECK(d.started.empty());
  CHECK(s.engine->runtime().instances().empty());
}

TEST_CASE("manager: index benefit and selection under budget") {
  ManagerOptions mo;
  mo.repeat_threshold = 1000;  // index candidates only
  SimEngine s(mo);
  const auto q = rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login");
  s.m().observe_query(q, s.clock);
  const auto f = s.m().forecast(s.clock);
  const auto cands = s.m().generate_candidates(f);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].spec.id == "auto-idx-repo.name");
  Sample sample(s.engine->log().snapshot(), 1000);
  const double b = s.m().estimate_benefit(cands[0], f, sample);
  CHECK(b > 0);

  // An index on a field no template filters on is worth nothing.
  DprCandidate other = cands[0];
  other.spec = make_index_spec("x", "org.login");
  other.descriptor = sink_descriptor(other.spec, sinks(other.spec).front()->id);
  CHECK(s.m().estimate_benefit(other, f, sample) == 0);

  s.m().set_mode(ManagerMode::Auto);
  s.m().set_budget_trace(BudgetTrace({{0, 5.0}}));  // below the index's ~7.7 units
  auto d = s.m().tick(s.clock);
  CHECK(d.chosen.empty());
  CHECK(s.manager_running().empty());

  s.m().set_budget_trace(BudgetTrace({{0, 10.0}}));
  d = s.m().tick(s.clock);
  REQUIRE(d.chosen.size() == 1);
  CHECK(d.cost <= 10.0);
  CHECK(s.manager_running().size() == 1);
}

TEST_CASE("manager: zero budget stops every manager DPR, leaves user DPRs") {
  SimEngine s;
  s.engine->runtime().start(make_index_spec("user-idx", "type"), "user");
  s.m().set_mode(ManagerMode::Auto);
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}, {s.clock + 3'600'000, 0.0}}));
  for (int i = 0; i < 3; ++i)
    s.m().observe_query(rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login"), s.clock);
  auto d = s.m().tick(s.clock);
  CHECK(!d.started.empty());
  CHECK(!s.manager_running().empty());

  // Well past the minimum active time, the budget drops to zero.
  s.clock += 3'600'000;
  d = s.m().tick(s.clock);
  CHECK(d.budget == 0);
  CHECK(s.manager_running().empty());
  bool user_running = false;
  for (auto& i : s.engine->runtime().instances())
    if (i.spec.id == "user-idx") user_running = i.running();
  CHECK(user_running);
}

TEST_CASE("manager: young unchosen DPR is kept until the minimum active time") {
  ManagerOptions mo;
  mo.top_m = 1;
  mo.repeat_threshold = 1000;
  mo.min_active_ms = 30'000;
  SimEngine s(mo);
  s.m().set_mode(ManagerMode::Auto);
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}}));
  const TimestampMs t0 = s.clock;
  s.m().observe_query(rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login"), t0);
  auto d = s.m().tick(t0);
  REQUIRE(d.started.size() == 1);
  const std::string first = d.started[0];

  // A heavier template on another field displaces the first from the forecast.
  for (int i = 0; i < 10; ++i)
    s.m().observe_query(rel_query({test::eq("actor.login", "user7")}, "repo.name"), t0 + 5'000);
  d = s.m().tick(t0 + 5'000);
  CHECK(std::find(d.kept.begin(), d.kept.end(), first) != d.kept.end());
  CHECK(d.cost <= d.budget);

  d = s.m().tick(t0 + 29'000);
  CHECK(std::find(d.kept.begin(), d.kept.end(), first) != d.kept.end());

  d = s.m().tick(t0 + 31'000);
  CHECK(std::find(d.stopped.begin(), d.stopped.end(), first) != d.stopped.end());
}

TEST_CASE("manager: recently stopped DPR is not restarted before the cooldown") {
  ManagerOptions mo;
  mo.repeat_threshold = 1000;
  SimEngine s(mo);
  s.m().set_mode(ManagerMode::Auto);
  const TimestampMs t0 = s.clock;
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}, {t0 + 60'000, 0.0}, {t0 + 120'000, 100.0}}));
  s.m().observe_query(rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login"), t0);
  CHECK(s.m().tick(t0).started.size() == 1);
  CHECK(s.m().tick(t0 + 60'000).stopped.size() == 1);
  // Budget is back at +61 s; the stop at +60 s cools down until +90 s.
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}, {t0 + 60'000, 0.0}, {t0 + 61'000, 100.0}}));
  auto d = s.m().tick(t0 + 70'000);
  CHECK(d.started.empty());
  CHECK(s.manager_running().empty());
  d = s.m().tick(t0 + 95'000);
  CHECK(d.started.size() == 1);
}

TEST_CASE("manager: candidate already provided by a user DPR is skipped") {
  ManagerOptions mo;
  mo.repeat_threshold = 1000;
  SimEngine s(mo);
  s.engine->runtime().start(make_index_spec("mine", "repo.name"), "user");
  s.engine->runtime().pump();
  s.m().set_mode(ManagerMode::Auto);
  s.m().set_budget_trace(BudgetTrace({{0, 100.0}}));
  s.m().observe_query(rel_query({test::eq("repo.name", "org1/repo1")}, "actor.login"), s.clock);
  const auto d = s.m().tick(s.clock);
  CHECK(d.started.empty());
}
