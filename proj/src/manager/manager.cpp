// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/manager/manager.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fluid/dpr/executor.hpp"
#include "fluid/json_probe.hpp"

namespace fluid {

using nlohmann::json;

const char* manager_mode_name(ManagerMode m) { return m == ManagerMode::Auto ? "auto" : "manual"; }

ManagerMode parse_manager_mode(std::string_view s) {
  if (s == "auto") return ManagerMode::Auto;
  if (s == "manual") return ManagerMode::Manual;
  throw Error(ErrorCode::InvalidArgument, "manager mode must be \"auto\" or \"manual\"");
}

json DprCandidate::to_json() const {
  json j;
  j["dpr_id"] = spec.id;
  j["rule"] = rule;
  j["descriptor"] = descriptor.to_json();
  j["templates"] = templates;
  j["sample_cost"] = sample_cost;
  j["live_cost"] = live_cost ? json(*live_cost) : json(nullptr);
  j["cost"] = cost;
  j["benefit"] = benefit;
  j["running_instance"] = running_instance ? json(*running_instance) : json(nullptr);
  j["selected"] = selected;
  return j;
}

json ManagerDecision::to_json() const {
  return {{"at", at},       {"budget", budget},   {"chosen", chosen}, {"value", value},
          {"cost", cost},   {"started", started}, {"stopped", stopped}, {"kept", kept},
          {"rationale", rationale}};
}

Sample::Sample(const LogSnapshot& log, std::size_t n) {
  const Offset hi = log.hi();
  const Offset lo = hi > n ? hi - n : 0;
  events_.reserve(hi - lo);
  log.scan({lo, hi}, [&](const RawEvent& e) { events_.push_back(e); });
}

double Sample::selectivity(const std::vector<FilterPredicate>& preds) const {
  if (events_.empty()) return 1.0;
  if (preds.empty()) return 1.0;
  std::string key;
  for (const auto& p : preds) key += p.key() + "\n";
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  std::vector<std::string> paths;
  for (const auto& p : preds) paths.push_back(p.field);
  FieldExtractor ex(paths);
  std::vector<FieldValue> vals(paths.size());
  std::size_t hits = 0;
  for (const auto& e : events_) {
    ex.extract(e.payload, vals);
    bool ok = true;
    for (std::size_t i = 0; i < preds.size() && ok; ++i) ok = vals[i].found && preds[i].eval(vals[i].value);
    hits += ok;
  }
  const double n = static_cast<double>(events_.size());
  const double s = std::max(static_cast<double>(hits), 0.5) / n;
  cache_[key] = s;
  return s;
}

double Sample::rate_per_ms() const {
  if (events_.size() < 2) return 0.0;
  TimestampMs lo = events_.front().event_ts, hi = lo;
  for (const auto& e : events_) {
    lo = std::min(lo, e.event_ts);
    hi = std::max(hi, e.event_ts);
  }
  return static_cast<double>(events_.size() - 1) / static_cast<double>(std::max<TimestampMs>(hi - lo, 1));
}

double estimate_cost(const DprSpec& spec, std::span<const RawEvent> sample) {
  if (sample.empty()) return spec.declared_cost_hint.value_or(static_unit_cost(spec));
  FusedDag dag = fuse(std::span<const DprSpec>(&spec, 1), FusionLevel::Concat);
  std::vector<std::shared_ptr<Structure>> scratch;
  for (const auto& t : dag.targets) scratch.push_back(make_structure("sample/" + t.node, sink_descriptor(spec, t.node)));
  DagExecutor ex(std::move(dag), std::move(scratch), {spec.id});
  ex.run(sample);
  return ex.stats().units / static_cast<double>(sample.size());
}

namespace {

std::string hex_id(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 10);
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-' ? c : '_');
  return out;
}

Query with_constants(const Query& q, const std::vector<FilterPredicate>& eq) {
  Query out = q;
  out.predicates.clear();
  for (const auto& p : q.predicates)
    if (p.op != CompareOp::Eq) out.predicates.push_back(p);
  out.predicates.insert(out.predicates.end(), eq.begin(), eq.end());
  return out;
}

// Statistics for hypothetical structures: selectivities from the sample,
// sizes proportional to range length.
class ProjectedStatistics : public PlanStatistics {
 public:
  explicit ProjectedStatistics(const Sample& s) : sample_(s) {}
  double records(OffsetRange r) const override { return static_cast<double>(r.size()); }
  double postings(const Candidate& c, const std::string& value, OffsetRange r) const override {
    auto preds = c.descriptor.filters;
    preds.push_back({c.descriptor.field, CompareOp::Eq, value});
    return sample_.selectivity(normalize_conjunction(preds)) * static_cast<double>(r.size());
  }
  double filtered_entries(const Candidate& c, OffsetRange r) const override {
    return sample_.selectivity(c.descriptor.filters) * static_cast<double>(r.size());
  }
  AggregateSplit aggregate_split(const Candidate& c, OffsetRange r, const EventWindow&) const override {
    const double w = c.descriptor.bucket_records;
    const double b = std::floor(static_cast<double>(r.size()) / w);
    return {b, static_cast<double>(r.size()) - b * w};
  }

 private:
  const Sample& sample_;
};

}  // namespace

DprManager::DprManager(const RawLog& log, DprRuntime& runtime, CostModel cm, ManagerOptions options)
    : log_(log),
      runtime_(runtime),
      cm_(cm),
      options_(options),
      history_(options.half_life_ms, options.top_m) {}

void DprManager::set_mode(ManagerMode m) {
  std::lock_guard lk(mu_);
  mode_ = m;
}

ManagerMode DprManager::mode() const {
  std::lock_guard lk(mu_);
  return mode_;
}

void DprManager::set_budget_trace(BudgetTrace trace) {
  std::lock_guard lk(mu_);
  trace_ = std::move(trace);
}

double DprManager::budget_at(TimestampMs t) const {
  std::lock_guard lk(mu_);
  return trace_ ? trace_->at(t) : options_.default_budget;
}

void DprManager::observe_query(const Query& q, TimestampMs now, const json& summary) {
  std::lock_guard lk(mu_);
  history_.observe(q, now, summary);
}

std::vector<WorkloadHistory::ForecastEntry> DprManager::forecast(TimestampMs now) const {
  std::lock_guard lk(mu_);
  return history_.forecast(now);
}

std::vector<DprCandidate> DprManager::generate_candidates(const std::vector<WorkloadHistory::ForecastEntry>& f) const {
  std::map<std::string, DprCandidate> by_id;
  auto add = [&](DprSpec spec, const char* rule, const std::string& tmpl) {
    auto it = by_id.find(spec.id);
    if (it == by_id.end()) {
      DprCandidate c;
      c.descriptor = sink_descriptor(spec, sinks(spec).front()->id);
      c.spec = std::move(spec);
      c.rule = rule;
      it = by_id.emplace(c.spec.id, std::move(c)).first;
    }
    auto& ts = it->second.templates;
    if (std::find(ts.begin(), ts.end(), tmpl) == ts.end()) ts.push_back(tmpl);
  };
  for (const auto& t : f) {
    std::set<std::string> fields;
    for (const auto& p : t.example.predicates)
      if (p.op == CompareOp::Eq) fields.insert(p.field);
    for (const auto& field : fields) add(make_index_spec("auto-idx-" + slug(field), field), "index", t.key);
    for (const auto& c : t.constants) {
      if (c.count < options_.repeat_threshold) continue;
      std::string ck;
      for (const auto& p : c.predicates) ck += p.key() + "\n";
      const std::string& g = t.example.group_by;
      add(make_prefilter_spec("auto-pf-" + hex_id(ck + "|" + g), c.predicates, {g}), "prefilter", t.key);
      add(make_aggregate_spec("auto-agg-" + hex_id(ck + "|" + g), g, c.predicates), "aggregate", t.key);
    }
  }
  std::vector<DprCandidate> out;
  for (auto& [id, c] : by_id) out.push_back(std::move(c));
  return out;
}

double DprManager::estimate_benefit(const DprCandidate& c, const std::vector<WorkloadHistory::ForecastEntry>& f,
                                    const Sample& sample) const {
  const double rate = sample.rate_per_ms();
  if (rate <= 0) return 0.0;
  ProjectedStatistics stats(sample);
  auto saving = [&](const Query& q) {
    if (!applicable_path(c.descriptor, q)) return 0.0;
    double span_ms = q.window.absolute ? static_cast<double>(q.window.absolute->to - q.window.absolute->from)
                                       : q.window.relative_hours.value_or(0) * 3'600'000.0;
    const auto w = static_cast<Offset>(std::max(1.0, std::round(rate * span_ms)));
    const auto cov = std::min<Offset>(w, static_cast<Offset>(std::max(1.0, std::round(rate * static_cast<double>(options_.tick_period_ms)))));
    const OffsetRange extent{0, w};
    const EventWindow win = EventWindow::all();
    Candidate cand{c.spec.id, c.descriptor, Coverage(OffsetRange{w - cov, w}), {}};
    const double without = plan_query(q, win, extent, {}, stats, cm_).est_cost;
    const double with = plan_query(q, win, extent, {cand}, stats, cm_).est_cost;
    return std::max(0.0, without - with);
  };
  double b = 0;
  for (const auto& t : f) {
    if (t.constants.empty()) {
      b += t.weight * saving(t.example);
      continue;
    }
    for (const auto& cs : t.constants) b += t.weight * cs.weight * saving(with_constants(t.example, cs.predicates));
  }
  return b;
}

std::vector<DprCandidate> DprManager::evaluate(TimestampMs now, const Sample& sample) {
  const auto f = history_.forecast(now);
  auto cands = generate_candidates(f);
  const auto insts = runtime_.instances();
  const Offset hi = log_.hi_watermark();

  std::vector<DprCandidate> out;
  for (auto& c : cands) {
    bool provided = false;
    for (const auto& i : insts) {
      if (!i.running()) continue;
      if (i.owner != "manager" &&
          std::find(i.descriptors.begin(), i.descriptors.end(), c.descriptor) != i.descriptors.end())
        provided = true;
      if (i.owner == "manager" && i.spec.id == c.spec.id) {
        c.running_instance = i.id;
        if (i.usage.records >= options_.min_live_records)
          c.live_cost = i.usage.standalone / static_cast<double>(i.usage.records);
      }
    }
    if (provided) continue;

    auto it = sample_costs_.find(c.spec.id);
    if (it == sample_costs_.end() || hi >= it->second.second + options_.resample_every) {
      const double sc = estimate_cost(c.spec, sample.events());
      it = sample_costs_.insert_or_assign(c.spec.id, std::make_pair(sc, hi)).first;
    }
    c.sample_cost = it->second.first;
    c.cost = std::max(c.sample_cost, c.live_cost.value_or(0.0)) * options_.cost_safety;
    c.benefit = estimate_benefit(c, f, sample);
    out.push_back(std::move(c));
  }
  return out;
}

bool DprManager::due(TimestampMs now) const {
  std::lock_guard lk(mu_);
  return !last_tick_ || now - *last_tick_ >= options_.tick_period_ms;
}

ManagerDecision DprManager::tick(TimestampMs now) {
  std::lock_guard lk(mu_);
  ManagerDecision d;
  d.at = now;
  if (mode_ == ManagerMode::Manual) {
    d.rationale = "manual mode";
    return d;
  }
  last_tick_ = now;
  d.budget = trace_ ? trace_->at(now) : options_.default_budget;

  Sample sample(log_.snapshot(), options_.sample_records);
  auto cands = evaluate(now, sample);

  std::vector<KnapsackItem> items;
  std::vector<std::size_t> item_of;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].benefit <= 0 || cands[i].cost <= 0) continue;
    items.push_back({cands[i].cost, cands[i].benefit});
    item_of.push_back(i);
  }
  const KnapsackResult sel = select_greedy(items, d.budget);
  std::set<std::string> chosen;
  for (std::size_t k : sel.chosen) {
    auto& c = cands[item_of[k]];
    c.selected = true;
    chosen.insert(c.spec.id);
    d.chosen.push_back(c.spec.id);
  }
  d.value = sel.value;
  d.cost = sel.cost;

  // Stop unchosen manager DPRs unless young and still within budget.
  std::vector<std::pair<double, InstanceInfo>> unchosen;
  for (const auto& i : runtime_.instances()) {
    if (!i.running() || i.owner != "manager" || chosen.count(i.spec.id)) continue;
    double cost = 0;
    bool known = false;
    for (const auto& c : cands) {
      if (c.spec.id == i.spec.id) {
        cost = c.cost;
        known = true;
      }
    }
    if (!known) {
      const double live = i.usage.records ? i.usage.standalone / static_cast<double>(i.usage.records) : 0.0;
      cost = std::max(live, static_unit_cost(i.spec)) * options_.cost_safety;
    }
    unchosen.emplace_back(cost, i);
  }
  std::sort(unchosen.begin(), unchosen.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [cost, i] : unchosen) {
    auto st = started_at_.find(i.id);
    const bool young = st != started_at_.end() && now - st->second < options_.min_active_ms;
    if (young && d.cost + cost <= d.budget) {
      d.cost += cost;
      d.kept.push_back(i.id);
      continue;
    }
    runtime_.stop(i.id);
    stopped_at_[i.spec.id] = now;
    started_at_.erase(i.id);
    d.stopped.push_back(i.id);
  }

  std::vector<std::string> cooling;
  for (const auto& c : cands) {
    if (!c.selected || c.running_instance) continue;
    auto st = stopped_at_.find(c.spec.id);
    if (st != stopped_at_.end() && now - st->second < options_.min_active_ms) {
      cooling.push_back(c.spec.id);
      continue;
    }
    const std::string id = runtime_.start(c.spec, "manager");
    started_at_[id] = now;
    d.started.push_back(id);
  }

  char buf[160];
  std::snprintf(buf, sizeof buf, "budget %.3f/record: %zu of %zu candidates chosen (cost %.3f, value %.3f)",
                d.budget, d.chosen.size(), cands.size(), sel.cost, sel.value);
  d.rationale = buf;
  if (!d.kept.empty()) d.rationale += "; kept " + std::to_string(d.kept.size()) + " young";
  if (!cooling.empty()) d.rationale += "; " + std::to_string(cooling.size()) + " waiting out restart cooldown";
  if (items.empty() && !cands.empty()) d.rationale += "; no candidate has positive benefit";

  last_candidates_ = std::move(cands);
  decisions_.push_back(d);
  if (decisions_.size() > 64) decisions_.erase(decisions_.begin());
  return d;
}

json DprManager::state(TimestampMs now) const {
  std::lock_guard lk(mu_);
  json j;
  j["mode"] = manager_mode_name(mode_);
  j["budget"] = trace_ ? trace_->at(now) : options_.default_budget;
  json fj = json::array();
  for (const auto& e : history_.forecast(now)) {
    json cs = json::array();
    for (const auto& c : e.constants) {
      json preds = json::array();
      for (const auto& p : c.predicates) preds.push_back(to_json(p));
      cs.push_back({{"predicates", preds}, {"share", c.weight}, {"count", c.count}});
    }
    fj.push_back({{"template", json::parse(e.key)}, {"weight", e.weight}, {"example", e.example.to_json()},
                  {"constants", cs}});
  }
  j["forecast"] = fj;
  json cj = json::array();
  for (const auto& c : last_candidates_) cj.push_back(c.to_json());
  j["candidates"] = cj;
  j["last_selection"] = decisions_.empty() ? json(nullptr) : decisions_.back().to_json();
  j["options"] = {{"tick_period_ms", options_.tick_period_ms},
                  {"min_active_ms", options_.min_active_ms},
                  {"half_life_ms", options_.half_life_ms},
                  {"top_m", options_.top_m},
                  {"cost_safety", options_.cost_safety}};
  return j;
}

std::vector<ManagerDecision> DprManager::decisions() const {
  std::lock_guard lk(mu_);
  return decisions_;
}

}  // namespace fluid
