// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/engine.hpp"

#include <chrono>

#include "fluid/json_probe.hpp"

namespace fluid {

using nlohmann::json;

namespace {

TimestampMs wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Engine::Engine(EngineOptions options) : options_(std::move(options)), meter_(options_.meter_interval_ms) {
  if (!options_.clock) options_.clock = wall_ms;
  if (!options_.log.clock) options_.log.clock = options_.clock;
  log_ = options_.log.log_dir.empty() ? std::make_unique<RawLog>(options_.log) : RawLog::open(options_.log);
  runtime_ = std::make_unique<DprRuntime>(*log_, registry_, meter_, options_.runtime);
  queries_ = std::make_unique<QueryEngine>(*log_, registry_, options_.cost);
  manager_ = std::make_unique<DprManager>(*log_, *runtime_, options_.cost, options_.manager);
}

Engine::~Engine() { stop_background(); }

TimestampMs Engine::now() const { return options_.clock(); }

Offset Engine::ingest(std::string_view payload) { return ingest(payload, now()); }

Offset Engine::ingest(std::string_view payload, TimestampMs ingest_ts) {
  const Offset o = log_->ingest(payload, ingest_ts);
  std::lock_guard lk(ingest_mu_);
  ++ingested_[meter_.interval_of(ingest_ts)];
  return o;
}

std::uint64_t Engine::ingested_in(std::int64_t interval) const {
  std::lock_guard lk(ingest_mu_);
  auto it = ingested_.find(interval);
  return it == ingested_.end() ? 0 : it->second;
}

QueryResult Engine::query(const Query& q, PlanMode mode) {
  QueryResult r = queries_->run(q, mode);
  json summary = {{"rows", r.rows.size()}, {"latency_ms", r.latency_ms}, {"est_cost", r.plan.est_cost}};
  manager_->observe_query(q, now(), summary);
  return r;
}

void Engine::start_background() {
  runtime_->start_background();
  if (ticker_.joinable()) return;
  stop_.store(false);
  ticker_ = std::thread([this] {
    while (!stop_.load()) {
      const TimestampMs t = now();
      if (manager_->mode() == ManagerMode::Auto && manager_->due(t)) {
        try {
          manager_->tick(t);
        } catch (const std::exception&) {
          // A failed cycle is retried next period.
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
}

void Engine::stop_background() {
  stop_.store(true);
  if (ticker_.joinable()) ticker_.join();
  runtime_->stop_background();
}

json Engine::metrics(std::optional<std::int64_t> cursor, std::size_t limit) const {
  const std::int64_t current = meter_.interval_of(now());
  std::int64_t from = cursor.value_or(current - 60);
  from = std::min(from, current);
  const std::int64_t to = std::min<std::int64_t>(current, from + static_cast<std::int64_t>(limit));

  std::map<std::int64_t, IntervalUsage> used;
  for (auto& u : meter_.intervals(from, to - 1)) used[u.index] = std::move(u);

  json rows = json::array();
  for (std::int64_t k = from; k < to; ++k) {
    const TimestampMs start = k * meter_.interval_ms();
    const std::uint64_t in = ingested_in(k);
    const auto it = used.find(k);
    const double units = it == used.end() ? 0.0 : it->second.units;
    const double budget = manager_->budget_at(start);
    json per = json::object();
    if (it != used.end()) {
      for (const auto& [id, u] : it->second.instances)
        per[id] = {{"attributed", u.attributed}, {"standalone", u.standalone}, {"records", u.records},
                   {"skipped", u.skipped}};
    }
    rows.push_back({{"interval", k},
                    {"start_ms", start},
                    {"ingested", in},
                    {"throughput_per_s", static_cast<double>(in) * 1000.0 / static_cast<double>(meter_.interval_ms())},
                    {"units", units},
                    {"budget_per_record", budget},
                    {"budget_units", budget * static_cast<double>(in)},
                    {"dprs", per}});
  }
  return {{"cursor", from},
          {"next_cursor", to},
          {"interval_ms", meter_.interval_ms()},
          {"intervals", rows},
          {"hi_watermark", log_->hi_watermark()},
          {"runtime_cursor", runtime_->cursor()},
          {"ingest_lag", log_->hi_watermark() - std::min(log_->hi_watermark(), runtime_->cursor())}};
}

json Engine::stream_status() const {
  auto latest = log_->latest_event_ts();
  return {{"hi_watermark", log_->hi_watermark()},
          {"latest_event_ts", latest ? json(*latest) : json(nullptr)},
          {"latest_event_time", latest ? json(format_iso8601(*latest)) : json(nullptr)},
          {"segment_count", log_->segment_count()},
          {"bytes", log_->bytes()},
          {"runtime_cursor", runtime_->cursor()},
          {"fusion_level", static_cast<int>(runtime_->fusion_level())}};
}

}  // namespace fluid
