// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "fluid/dpr/budget_meter.hpp"
#include "fluid/dpr/executor.hpp"
#include "fluid/fusion/fusion.hpp"
#include "helpers.hpp"

using namespace fluid;
using test::eq;

namespace {

std::vector<DprSpec> mixed_specs() {
  auto pair = test::fusion_pair(2);
  std::vector<DprSpec> s = pair;
  s.push_back(make_index_spec("by_repo", "repo.name", {eq("type", "IssueCommentEvent")}));
  s.push_back(make_index_spec("by_repo_again", "repo.name", {eq("type", "IssueCommentEvent")}));
  s.push_back(make_prefilter_spec("pf", {eq("type", "PullRequestEvent"), eq("payload.action", "opened")},
                                  {"repo.name"}));
  s.push_back(make_aggregate_spec("agg", "actor.login", {eq("payload.action", "opened"), eq("type", "PullRequestEvent")},
                                  64));
  s[4].nodes[1].fields = s[5].nodes[1].fields = {"actor.login", "payload.action", "repo.name", "type"};
  return s;
}

struct Run {
  std::vector<nlohmann::json> dumps;  // per spec, per sink in order
  ExecStats stats;
  std::vector<double> attributed;
};

Run execute(const std::vector<DprSpec>& specs, FusionLevel level, const std::vector<std::string>& ev,
            BudgetMeter* meter = nullptr) {
  const FusedDag dag = fuse(specs, level);
  std::vector<std::shared_ptr<Structure>> structures;
  for (const auto& t : dag.targets)
    structures.push_back(make_structure(specs[t.spec].id + "/" + t.node, sink_descriptor(specs[t.spec], t.node)));
  std::vector<std::string> ids;
  for (const auto& s : specs) ids.push_back(s.id);
  DagExecutor ex(dag, structures, ids);
  std::vector<RawEvent> batch;
  for (std::size_t i = 0; i < ev.size(); ++i) batch.push_back({i, 0, 0, ev[i]});
  ex.run(batch, meter);
  Run r;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (std::size_t t = 0; t < dag.targets.size(); ++t)
      if (dag.targets[t].spec == s) r.dumps.push_back(structures[t]->dump({0, ev.size()}));
  r.stats = ex.stats();
  return r;
}

}  // namespace

TEST_CASE("fusion levels share progressively more") {
  const auto specs = mixed_specs();
  const auto l0 = fuse(specs, FusionLevel::Concat);
  const auto l1 = fuse(specs, FusionLevel::Prefix);
  const auto l2 = fuse(specs, FusionLevel::Full);
  CHECK(l0.count(OpKind::Source) == 1);
  CHECK(l0.count(OpKind::ParseFields) == specs.size());
  CHECK(l1.count(OpKind::ParseFields) < l0.count(OpKind::ParseFields));
  CHECK(l1.count(OpKind::Transform) == l0.count(OpKind::Transform));
  CHECK(l2.count(OpKind::Transform) < l1.count(OpKind::Transform));
  CHECK(l2.count(OpKind::Sink) < l1.count(OpKind::Sink));  // identical index sinks fan out
  CHECK(l2.targets.size() == l0.targets.size());
  CHECK(l2.nodes.size() <= l1.nodes.size());
  CHECK(l1.nodes.size() <= l0.nodes.size());
  // The two differently ordered filter runs collapse at level 1.
  const auto pf_agg = std::vector<DprSpec>{specs[4], specs[5]};
  CHECK(fuse(pf_agg, FusionLevel::Prefix).count(OpKind::Filter) == 2);
  CHECK(fuse(pf_agg, FusionLevel::Concat).count(OpKind::Filter) == 4);
}

TEST_CASE("every sink's structure is identical fused and unfused") {
  const auto specs = mixed_specs();
  const auto ev = test::events(3, 1, 4000);
  std::vector<nlohmann::json> alone;
  for (const auto& s : specs) {
    auto r = execute({s}, FusionLevel::Concat, ev);
    alone.insert(alone.end(), r.dumps.begin(), r.dumps.end());
  }
  for (auto level : {FusionLevel::Concat, FusionLevel::Prefix, FusionLevel::Full}) {
    const auto r = execute(specs, level, ev);
    REQUIRE(r.dumps.size() == alone.size());
    for (std::size_t i = 0; i < alone.size(); ++i) CHECK(r.dumps[i] == alone[i]);
  }
}

TEST_CASE("per-record invocations are monotone in the level") {
  const auto specs = mixed_specs();
  const auto ev = test::events(4, 1, 2000);
  const auto i0 = execute(specs, FusionLevel::Concat, ev).stats.invocations;
  const auto i1 = execute(specs, FusionLevel::Prefix, ev).stats.invocations;
  const auto i2 = execute(specs, FusionLevel::Full, ev).stats.invocations;
  CHECK(i2 <= i1);
  CHECK(i1 <= i0);
  CHECK(i2 < i0);
}

TEST_CASE("two identical specs cost half at level 2") {
  auto a = test::comment_flag_spec("a", {"crash"}, "flag", 3);
  auto b = a;
  b.id = "b";
  const std::vector<DprSpec> specs{a, b};
  CHECK(dag_cost(fuse(specs, FusionLevel::Full)) * 2 ==
        doctest::Approx(dag_cost(fuse(specs, FusionLevel::Concat))));
  const auto att = attributed_costs(fuse(specs, FusionLevel::Full));
  CHECK(att[0] == doctest::Approx(att[1]));
  CHECK(att[0] + att[1] == doctest::Approx(dag_cost(fuse(specs, FusionLevel::Full))));
}

TEST_CASE("predicted cost tracks measured units") {
  const auto specs = test::fusion_pair(2);
  const auto ev = test::events(5, 1, 3000);
  for (auto level : {FusionLevel::Concat, FusionLevel::Prefix, FusionLevel::Full}) {
    const auto dag = fuse(specs, level);
    // Selectivity measured on a disjoint sample.
    std::vector<RawEvent> sample;
    const auto sev = test::events(6, 1, 1000);
    for (std::size_t i = 0; i < sev.size(); ++i) sample.push_back({i, 0, 0, sev[i]});
    std::vector<std::shared_ptr<Structure>> st;
    for (const auto& t : dag.targets) st.push_back(make_structure("s", sink_descriptor(specs[t.spec], t.node)));
    DagExecutor probe(dag, st, {"a", "b"});
    probe.run(sample);
    const double predicted = dag_cost(dag, probe.observed_selectivity());
    BudgetMeter meter(1000);
    const auto r = execute(specs, level, ev, &meter);
    const double measured = r.stats.units / static_cast<double>(ev.size());
    CHECK(std::abs(predicted - measured) <= 0.2 * measured);
    CHECK(meter.total_units() == doctest::Approx(r.stats.units));
  }
}

TEST_CASE("fuse is deterministic and fusedump carries provenance") {
  const auto specs = mixed_specs();
  const auto a = fusedump(fuse(specs, FusionLevel::Full), specs);
  const auto b = fusedump(fuse(specs, FusionLevel::Full), specs);
  CHECK(a == b);
  const auto dag = fuse(specs, FusionLevel::Full);
  bool multi = false;
  for (const auto& n : dag.nodes) multi = multi || n.provenance.size() > 1;
  CHECK(multi);
  CHECK(a.dump().find("toxic") != std::string::npos);
}

TEST_CASE("meter attributes shared cost evenly") {
  auto a = make_index_spec("a", "repo.name");
  auto b = make_index_spec("b", "actor.login");
  b.nodes[1].fields = a.nodes[1].fields = {"actor.login", "repo.name"};
  BudgetMeter meter(1000);
  const auto ev = test::events(8, 1, 500);
  execute({a, b}, FusionLevel::Prefix, ev, &meter);
  const auto ua = meter.instance_total("a");
  const auto ub = meter.instance_total("b");
  CHECK(ua.standalone == doctest::Approx(7.0 * 500));
  CHECK(ua.attributed == doctest::Approx(4.5 * 500));
  CHECK(ub.attributed == doctest::Approx(4.5 * 500));
  CHECK(meter.total_units() == doctest::Approx(9.0 * 500));
}
