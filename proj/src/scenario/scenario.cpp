// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/scenario/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "fluid/engine.hpp"
#include "fluid/json_probe.hpp"
#include "fluid/stream/event_source.hpp"

namespace fluid {

using nlohmann::json;

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::FluidManual: return "fluid-manual";
    case Strategy::FluidAuto: return "fluid-auto";
    case Strategy::Excessive: return "excessive";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "baseline") return Strategy::Baseline;
  if (s == "fluid-manual" || s == "manual") return Strategy::FluidManual;
  if (s == "fluid-auto" || s == "fluid" || s == "auto") return Strategy::FluidAuto;
  if (s == "excessive") return Strategy::Excessive;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy: " + std::string(s));
}

std::vector<DprSpec> default_baseline() {
  DprSpec s;
  s.id = "baseline-etl";
  OperatorNode src;
  src.id = "src";
  OperatorNode parse;
  parse.id = "parse";
  parse.kind = OpKind::ParseFields;
  parse.fields = {"created_at", "payload.action", "type"};
  parse.inputs = {"src"};
  OperatorNode by_type;
  by_type.id = "idx_type";
  by_type.kind = OpKind::Sink;
  by_type.structure = StructureKind::HashIndex;
  by_type.params = {{"field", "type"}};
  by_type.inputs = {"parse"};
  OperatorNode by_action = by_type;
  by_action.id = "idx_action";
  by_action.params = {{"field", "payload.action"}};
  s.nodes = {src, parse, by_type, by_action};
  return {s};
}

std::vector<std::string> default_excessive_fields() {
  return {"repo.id", "repo.name", "actor.id", "actor.login", "org.login", "payload.pull_request.base.repo.language"};
}

std::vector<DprSpec> excessive_specs(const std::vector<std::string>& fields) {
  std::vector<std::string> parse = fields;
  std::sort(parse.begin(), parse.end());
  parse.erase(std::unique(parse.begin(), parse.end()), parse.end());
  std::vector<DprSpec> out;
  for (const auto& f : fields) {
    DprSpec s;
    s.id = "etl-idx-" + f;
    OperatorNode src;
    src.id = "src";
    OperatorNode p;
    p.id = "parse";
    p.kind = OpKind::ParseFields;
    p.fields = parse;
    p.inputs = {"src"};
    OperatorNode sink;
    sink.id = "sink";
    sink.kind = OpKind::Sink;
    sink.structure = StructureKind::HashIndex;
    sink.params = {{"field", f}};
    sink.inputs = {"parse"};
    s.nodes = {src, p, sink};
    out.push_back(std::move(s));
  }
  return out;
}

ScenarioSpec ScenarioSpec::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "scenario must be a JSON object");
  ScenarioSpec s;
  try {
    s.name = j.value("name", s.name);
    if (j.contains("generator")) s.generator = GeneratorParams::from_json(j.at("generator"));
    if (j.contains("interval_s")) s.interval_ms = static_cast<TimestampMs>(j.at("interval_s").get<double>() * 1000);
    s.fusion_level = j.value("fusion_level", s.fusion_level);
    if (j.contains("baseline"))
      for (const auto& b : j.at("baseline")) s.baseline.push_back(spec_from_json(b));
    if (j.contains("excessive_fields")) s.excessive_fields = j.at("excessive_fields").get<std::vector<std::string>>();
    if (j.contains("provisioned_units")) s.provisioned_units = j.at("provisioned_units").get<double>();
    if (j.contains("manager")) {
      const auto& m = j.at("manager");
      auto& o = s.manager;
      if (m.contains("half_life_s")) o.half_life_ms = m.at("half_life_s").get<double>() * 1000;
      if (m.contains("tick_s")) o.tick_period_ms = static_cast<TimestampMs>(m.at("tick_s").get<double>() * 1000);
      if (m.contains("min_active_s"))
        o.min_active_ms = static_cast<TimestampMs>(m.at("min_active_s").get<double>() * 1000);
      o.top_m = m.value("top_m", o.top_m);
      o.sample_records = m.value("sample_records", o.sample_records);
      o.cost_safety = m.value("cost_safety", o.cost_safety);
      o.repeat_threshold = m.value("repeat_threshold", o.repeat_threshold);
    }
    if (j.contains("timeline")) {
      for (const auto& a : j.at("timeline")) {
        TimelineAction t;
        t.at_hours = a.at("at_hours").get<double>();
        t.kind = a.at("action").get<std::string>();
        t.body = a;
        if (t.kind != "query" && t.kind != "start_dpr" && t.kind != "stop_dpr" && t.kind != "manager")
          throw Error(ErrorCode::InvalidArgument, "unknown timeline action: " + t.kind);
        if (t.kind == "query" && !a.contains("query"))
          throw Error(ErrorCode::InvalidArgument, "query action without a query");
        s.timeline.push_back(std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("scenario: ") + e.what());
  }
  if (s.interval_ms <= 0) throw Error(ErrorCode::InvalidArgument, "interval_s must be positive");
  if (s.fusion_level < 0 || s.fusion_level > 2) throw Error(ErrorCode::InvalidArgument, "fusion_level must be 0..2");
  if (s.manager.tick_period_ms <= 0) throw Error(ErrorCode::InvalidArgument, "manager tick must be positive");
  std::stable_sort(s.timeline.begin(), s.timeline.end(),
                   [](const TimelineAction& a, const TimelineAction& b) { return a.at_hours < b.at_hours; });
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open scenario " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "scenario " + path + ": " + e.what());
  }
  return from_json(j);
}

std::vector<std::string> load_events(const ScenarioSpec& s, const std::string& events_path) {
  std::vector<std::string> out;
  if (!events_path.empty()) {
    NdjsonReader r(events_path);
    while (auto line = r.next()) out.push_back(std::move(*line));
    return out;
  }
  EventGenerator gen(s.generator.value_or(GeneratorParams{}));
  out.reserve(gen.params().total_events());
  std::string line;
  while (gen.next(line)) out.push_back(line);
  return out;
}

double StrategyReport::max_utilization() const {
  double m = 0;
  for (const auto& r : intervals)
    if (r.provisioned > 0) m = std::max(m, r.units / r.provisioned);
  return m;
}

std::vector<std::int64_t> StrategyReport::budget_violations() const {
  std::vector<std::int64_t> out;
  for (const auto& r : intervals)
    if (r.manager_units > r.budget_per_record * static_cast<double>(r.records) * (1 + 1e-9) + 1e-6)
      out.push_back(r.interval);
  return out;
}

std::vector<std::int64_t> StrategyReport::provision_violations() const {
  std::vector<std::int64_t> out;
  for (const auto& r : intervals)
    if (r.provisioned > 0 && r.units > r.provisioned * (1 + 1e-9) + 1e-6) out.push_back(r.interval);
  return out;
}

BudgetTrace derive_budget(const StrategyReport& baseline, double provisioned) {
  std::uint64_t peak = 0;
  for (const auto& r : baseline.intervals) peak = std::max(peak, r.records);
  std::vector<std::pair<TimestampMs, double>> pts;
  for (const auto& r : baseline.intervals) {
    double b = 0;
    if (r.records > 0 && r.records < peak)
      b = std::max(0.0, (provisioned - r.units) / static_cast<double>(r.records));
    pts.emplace_back(r.start_ms, b);
  }
  return BudgetTrace(std::move(pts));
}

namespace {

constexpr TimestampMs kHourMs = 3'600'000;

void substitute(json& j, const std::map<std::string, std::string>& vars) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.size() > 1 && s[0] == '$') {
      auto it = vars.find(s.substr(1));
      if (it == vars.end()) throw Error(ErrorCode::FailedPrecondition, "unbound variable " + s);
      j = it->second;
    }
  } else if (j.is_structured()) {
    for (auto& v : j) substitute(v, vars);
  }
}

std::string plan_paths(const StitchedPlan& p) {
  std::string out;
  std::set<std::string> seen;
  for (const auto& part : p.parts) {
    const std::string k = path_kind_name(part.path);
    if (!seen.insert(k).second) continue;
    if (!out.empty()) out += '+';
    out += k;
  }
  return out.empty() ? "none" : out;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string rows_text(const std::vector<RankedRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    if (!out.empty()) out += "; ";
    out += r.key + "=" + std::to_string(r.count);
  }
  return out;
}

}  // namespace

StrategyReport run_strategy(const ScenarioSpec& s, Strategy strategy, const std::vector<std::string>& events,
                            const std::optional<BudgetTrace>& budget, double provisioned, double speedup,
                            bool run_timeline) {
  const auto wall0 = std::chrono::steady_clock::now();
  StrategyReport rep;
  rep.strategy = strategy;

  TimestampMs t0 = 0;
  for (const auto& e : events)
    if (auto ts = probe_timestamp_ms(e, "created_at")) {
      t0 = *ts - (((*ts % kHourMs) + kHourMs) % kHourMs);
      break;
    }

  std::atomic<TimestampMs> sim{t0};
  EngineOptions eo;
  eo.meter_interval_ms = s.interval_ms;
  eo.runtime.fusion = fusion_level_from_int(s.fusion_level);
  eo.manager = s.manager;
  eo.clock = [&sim] { return sim.load(); };
  Engine engine(eo);
  DprRuntime& rt = engine.runtime();
  DprManager& mgr = engine.manager();

  for (const auto& b : s.baseline.empty() ? default_baseline() : s.baseline) rt.start(b, "baseline");
  if (strategy == Strategy::Excessive)
    for (const auto& x : excessive_specs(s.excessive_fields.empty() ? default_excessive_fields() : s.excessive_fields))
      rt.start(x, "baseline");
  if (strategy == Strategy::FluidAuto) {
    if (budget) mgr.set_budget_trace(*budget);
    mgr.set_mode(ManagerMode::Auto);
  }

  const BudgetMeter& meter = engine.meter();
  std::map<std::int64_t, int> running_at_end;
  auto manager_running = [&] {
    int n = 0;
    for (const auto& i : rt.instances())
      if (i.owner == "manager" && i.running()) ++n;
    return n;
  };

  std::map<std::string, std::string> vars;
  auto run_action = [&](const TimelineAction& a) {
    json body = a.body;
    if (a.kind == "query") {
      json qj = body.at("query");
      substitute(qj, vars);
      const Query q = query_from_json(qj);
      QueryResult r = engine.query(q);
      QueryRow row;
      row.at_hours = a.at_hours;
      row.name = body.value("name", "query");
      row.query = qj;
      row.rows = r.rows;
      row.latency_ms = r.latency_ms;
      row.plan_ms = r.plan_ms;
      row.est_cost = r.plan.est_cost;
      row.raw_cost = r.plan.raw_cost;
      row.paths = plan_paths(r.plan);
      if (body.contains("bind")) {
        for (const auto& [var, idx] : body.at("bind").items()) {
          const auto i = idx.get<std::size_t>();
          if (i >= r.rows.size())
            throw Error(ErrorCode::FailedPrecondition,
                        "binding $" + var + ": " + row.name + " returned " + std::to_string(r.rows.size()) + " rows");
          vars[var] = r.rows[i].key;
        }
      }
      rep.queries.push_back(std::move(row));
    } else if (a.kind == "start_dpr") {
      if (strategy != Strategy::FluidManual) return;
      json sj = body.at("spec");
      substitute(sj, vars);
      rt.start(spec_from_json(sj), "user");
    } else if (a.kind == "stop_dpr") {
      if (strategy != Strategy::FluidManual) return;
      json id = body.at("id");
      substitute(id, vars);
      rt.stop(id.get<std::string>());
    } else if (a.kind == "manager") {
      if (strategy != Strategy::FluidAuto) return;
      mgr.set_mode(parse_manager_mode(body.at("mode").get<std::string>()));
    }
  };

  std::size_t next_action = 0;
  const auto& timeline = s.timeline;
  auto action_time = [&](std::size_t i) {
    return t0 + static_cast<TimestampMs>(timeline[i].at_hours * static_cast<double>(kHourMs));
  };
  const TimestampMs tick = s.manager.tick_period_ms;
  TimestampMs next_tick = t0 + tick;
  TimestampMs next_boundary = (meter.interval_of(t0) + 1) * s.interval_ms;

  // Runs every scheduled item with time <= t, in time order; at equal times
  // interval bookkeeping, then the manager, then timeline actions.
  auto advance_to = [&](TimestampMs t) {
    while (true) {
      TimestampMs when = std::min(next_tick, next_boundary);
      if (run_timeline && next_action < timeline.size()) when = std::min(when, action_time(next_action));
      if (when > t) break;
      sim.store(std::max(sim.load(), when));
      rt.pump();
      if (next_boundary == when) {
        running_at_end[meter.interval_of(when) - 1] = manager_running();
        next_boundary += s.interval_ms;
      }
      if (next_tick == when) {
        if (strategy == Strategy::FluidAuto && mgr.mode() == ManagerMode::Auto) mgr.tick(when);
        next_tick += tick;
      }
      while (run_timeline && next_action < timeline.size() && action_time(next_action) == when)
        run_action(timeline[next_action++]);
    }
  };

  std::uint64_t n = 0;
  for (const auto& line : events) {
    const auto ts = probe_timestamp_ms(line, "created_at");
    const TimestampMs t = std::max(sim.load(), ts.value_or(sim.load()));
    advance_to(t);
    sim.store(t);
    engine.ingest(line, t);
    if (++n % 4096 == 0) rt.pump();
    if (speedup > 0 && n % 256 == 0) {
      const auto target = wall0 + std::chrono::microseconds(
                                      static_cast<std::int64_t>(static_cast<double>(t - t0) * 1000.0 / speedup));
      std::this_thread::sleep_until(target);
    }
  }
  rt.pump();
  running_at_end[meter.interval_of(sim.load())] = manager_running();
  while (run_timeline && next_action < timeline.size()) run_action(timeline[next_action++]);
  rt.pump();

  std::map<std::string, std::string> owner;
  for (const auto& i : rt.instances()) owner[i.id] = i.owner;
  const std::int64_t first = meter.interval_of(t0);
  const std::int64_t last = meter.interval_of(sim.load());
  std::map<std::int64_t, IntervalUsage> used;
  for (auto& u : meter.intervals(first, last)) used[u.index] = std::move(u);
  for (std::int64_t k = first; k <= last; ++k) {
    IntervalRow row;
    row.interval = k;
    row.start_ms = k * s.interval_ms;
    row.records = engine.ingested_in(k);
    row.provisioned = provisioned;
    row.budget_per_record = budget ? budget->at(row.start_ms) : 0.0;
    if (auto it = used.find(k); it != used.end()) {
      row.units = it->second.units;
      for (const auto& [id, u] : it->second.instances)
        if (owner[id] == "manager") row.manager_units += u.attributed;
    }
    auto re = running_at_end.find(k);
    row.manager_running_at_end = re == running_at_end.end() ? 0 : re->second;
    rep.intervals.push_back(row);
  }
  rep.records = n;
  rep.total_units = meter.total_units();
  rep.decisions = mgr.decisions();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return rep;
}

ScenarioReport run_scenario(const ScenarioSpec& s, const RunOptions& opt) {
  const auto events = load_events(s, opt.events_path);
  if (events.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no events");

  ScenarioReport rep;
  rep.name = s.name;
  std::optional<StrategyReport> calib;
  if (!s.provisioned_units || !opt.budget) {
    calib = run_strategy(s, Strategy::Baseline, events, std::nullopt, 0, 0, false);
    double peak = 0;
    for (const auto& r : calib->intervals) peak = std::max(peak, r.units);
    rep.provisioned = s.provisioned_units.value_or(peak);
  } else {
    rep.provisioned = *s.provisioned_units;
  }
  rep.budget = opt.budget ? *opt.budget : derive_budget(*calib, rep.provisioned);

  for (Strategy st : opt.strategies)
    rep.strategies.push_back(run_strategy(s, st, events, rep.budget, rep.provisioned, opt.speedup));
  return rep;
}

bool ScenarioReport::answers_identical() const {
  for (std::size_t i = 1; i < strategies.size(); ++i) {
    const auto& a = strategies[0].queries;
    const auto& b = strategies[i].queries;
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k].name != b[k].name || a[k].rows != b[k].rows) return false;
  }
  return true;
}

std::string ScenarioReport::utilization_csv() const {
  std::ostringstream o;
  o << "strategy,interval,start_ms,records,units,provisioned_units,utilization,budget_per_record,manager_units,"
       "manager_budget_units,manager_running_at_end\n";
  o << std::setprecision(10);
  for (const auto& st : strategies)
    for (const auto& r : st.intervals)
      o << strategy_name(st.strategy) << ',' << r.interval << ',' << r.start_ms << ',' << r.records << ',' << r.units
        << ',' << r.provisioned << ',' << (r.provisioned > 0 ? r.units / r.provisioned : 0.0) << ','
        << r.budget_per_record << ',' << r.manager_units << ','
        << r.budget_per_record * static_cast<double>(r.records) << ',' << r.manager_running_at_end << '\n';
  return o.str();
}

std::string ScenarioReport::queries_csv() const {
  std::ostringstream o;
  o << "strategy,at_hours,name,latency_ms,plan_ms,est_cost,raw_cost,paths,rows\n";
  for (const auto& st : strategies)
    for (const auto& q : st.queries)
      o << strategy_name(st.strategy) << ',' << q.at_hours << ',' << csv_quote(q.name) << ',' << q.latency_ms << ','
        << q.plan_ms << ',' << q.est_cost << ',' << q.raw_cost << ',' << q.paths << ',' << csv_quote(rows_text(q.rows))
        << '\n';
  return o.str();
}

std::string ScenarioReport::summary() const {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3);
  o << "scenario " << name << "\n";
  o << "provisioned units per interval: " << provisioned << "\n";
  std::size_t zero = 0;
  for (const auto& [t, b] : budget.points())
    if (b == 0) ++zero;
  o << "budget intervals: " << budget.points().size() << " (" << zero << " at zero)\n\n";
  for (const auto& st : strategies) {
    o << "[" << strategy_name(st.strategy) << "]\n";
    o << "  records " << st.records << ", units " << st.total_units << ", wall " << st.wall_seconds << " s\n";
    o << "  peak utilization " << st.max_utilization() << " of provisioned, intervals over provisioned "
      << st.provision_violations().size() << "\n";
    if (st.strategy == Strategy::FluidAuto) {
      int zero_with_dprs = 0;
      for (const auto& r : st.intervals)
        if (r.budget_per_record == 0 && r.records > 0 && r.manager_running_at_end > 0) ++zero_with_dprs;
      o << "  manager decisions " << st.decisions.size() << ", intervals over manager budget "
        << st.budget_violations().size() << ", zero-budget intervals ending with manager DPRs " << zero_with_dprs
        << "\n";
    }
    std::map<std::string, std::vector<double>> lat;
    for (const auto& q : st.queries) lat[q.name].push_back(q.latency_ms);
    for (auto& [qn, v] : lat) {
      std::sort(v.begin(), v.end());
      o << "  " << qn << ": " << v.size() << " runs, median latency " << v[v.size() / 2] << " ms\n";
    }
  }
  if (strategies.size() > 1) o << "\nanswers identical across strategies: " << (answers_identical() ? "yes" : "NO") << "\n";
  return o.str();
}

void ScenarioReport::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& file, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / file);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + file + " in " + dir);
    out << text;
  };
  put("utilization.csv", utilization_csv());
  put("queries.csv", queries_csv());
  put("summary.txt", summary());
  budget.save_csv((std::filesystem::path(dir) / "budget_trace.csv").string());
}

}  // namespace fluid
