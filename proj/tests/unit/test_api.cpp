// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "fluid/api/control_api.hpp"
#include "fluid/api/http_server.hpp"
#include "helpers.hpp"

using namespace fluid;
using nlohmann::json;

namespace {

struct Fixture {
  std::atomic<TimestampMs> clock{0};
  std::unique_ptr<Engine> engine;
  std::unique_ptr<ControlApi> api;
  std::vector<std::string> ev = test::events(3, 2, 400);

  Fixture() {
    EngineOptions eo;
    eo.meter_interval_ms = 1000;
    eo.clock = [this] { return clock.load(); };
    engine = std::make_unique<Engine>(eo);
    api = std::make_unique<ControlApi>(*engine);
  }

  ApiResponse call(const std::string& method, const std::string& path, const json& body = nullptr,
                   std::map<std::string, std::string> params = {}) {
    return api->handle(method, path, params, body.is_null() ? std::string() : body.dump());
  }

  void ingest(std::size_t from, std::size_t to) {
    std::string nd;
    for (std::size_t i = from; i < to; ++i) nd += ev[i] + "\n";
    auto r = api->handle("POST", "/ingest", {}, nd);
    REQUIRE(r.status == 200);
    CHECK(r.body["accepted"] == to - from);
  }
};

json index_spec_json(const std::string& id, const std::string& field) { return to_json(make_index_spec(id, field)); }

json q2_json(const std::string& repo) {
  return {{"window", {{"abs_range", {{"from", 0}, {"to", 4'000'000'000'000LL}}}}},
          {"predicates", json::array({{{"field", "repo.name"}, {"eq", repo}}})},
          {"group_by", "actor.login"},
          {"agg", "count"},
          {"top_k", 5}};
}

}  // namespace

TEST_CASE("api: DPR lifecycle routes and status codes") {
  Fixture f;
  f.ingest(0, 200);

  auto r = f.call("POST", "/dprs", index_spec_json("idx-repo", "repo.name"));
  REQUIRE(r.status == 201);
  const std::string id = r.body["instance_id"];
  CHECK(r.body["activation_offset"] == 200);
  CHECK(r.body["structures"].size() == 1);

  CHECK(f.call("POST", "/dprs", index_spec_json("idx-repo", "repo.name")).status == 409);

  f.ingest(200, 500);
  f.engine->runtime().pump();

  r = f.call("GET", "/dprs");
  REQUIRE(r.status == 200);
  REQUIRE(r.body["instances"].size() == 1);
  CHECK(r.body["hi_watermark"] == 500);
  CHECK(r.body["instances"][0]["coverage"] == json::array({json::array({200, 500})}));

  r = f.call("DELETE", "/dprs/" + id);
  REQUIRE(r.status == 200);
  CHECK(r.body["coverage"] == json::array({json::array({200, 500})}));
  CHECK(f.call("DELETE", "/dprs/" + id).status == 409);
  CHECK(f.call("DELETE", "/dprs/nope").status == 404);
}

TEST_CASE("api: malformed and invalid requests") {
  Fixture f;
  auto r = f.api->handle("POST", "/dprs", {}, "{not json");
  CHECK(r.status == 400);
  CHECK(r.body.contains("code"));
  CHECK(r.body.contains("message"));

  json bad = index_spec_json("x", "repo.name");
  bad["nodes"].erase(bad["nodes"].size() - 1);  // drop the sink
  CHECK(f.call("POST", "/dprs", bad).status == 400);

  CHECK(f.call("GET", "/nope").status == 404);
  CHECK(f.call("PUT", "/dprs").status == 405);
  CHECK(f.call("GET", "/query").status == 405);
  CHECK(f.call("POST", "/query", json{{"group_by", "repo.name"}}).status == 400);
  CHECK(f.call("POST", "/manager", json{{"mode", "sometimes"}}).status == 400);
  CHECK(f.call("POST", "/fusion", json{{"level", 7}}).status == 400);
  CHECK(f.call("GET", "/metrics", nullptr, {{"cursor", "12x"}}).status == 400);
  CHECK(f.call("GET", "/registry", nullptr, {{"kind", "btree"}}).status == 400);
}

TEST_CASE("api: stitched and raw queries agree") {
  Fixture f;
  f.ingest(0, 300);
  REQUIRE(f.call("POST", "/dprs", index_spec_json("idx-repo", "repo.name")).status == 201);
  f.ingest(300, f.ev.size());
  f.engine->runtime().pump();

  EventGenerator g([] {
    GeneratorParams p;
    p.repos = 300;
    p.actors = 800;
    p.orgs = 40;
    p.spike_repo_rank = 50;
    p.spam_actor_rank = 100;
    return p;
  }());
  const std::string repo = g.repo(50).name;

  auto stitched = f.call("POST", "/query", q2_json(repo));
  json raw_q = q2_json(repo);
  raw_q["plan"] = "raw";
  auto raw = f.call("POST", "/query", raw_q);
  REQUIRE(stitched.status == 200);
  REQUIRE(raw.status == 200);
  CHECK(!stitched.body["rows"].empty());
  CHECK(stitched.body["rows"] == raw.body["rows"]);
  CHECK(stitched.body["plan"]["est_cost"].get<double>() < raw.body["plan"]["est_cost"].get<double>());
}

TEST_CASE("api: registry filters, metrics, manager, fusion, status") {
  Fixture f;
  f.clock = 5'500;
  f.ingest(0, 100);
  REQUIRE(f.call("POST", "/dprs", index_spec_json("idx-type", "type")).status == 201);
  REQUIRE(f.call("POST", "/dprs", to_json(make_aggregate_spec("agg-repo", "repo.name"))).status == 201);
  f.ingest(100, 200);
  f.engine->runtime().pump();

  auto r = f.call("GET", "/registry", nullptr, {{"kind", "hash_index"}});
  REQUIRE(r.status == 200);
  REQUIRE(r.body["structures"].size() == 1);
  CHECK(r.body["structures"][0]["kind"] == "hash_index");
  CHECK(!r.body["structures"][0]["event_time_bounds"].empty());
  r = f.call("GET", "/registry", nullptr, {{"field", "repo.name"}});
  REQUIRE(r.body["structures"].size() == 1);
  CHECK(r.body["structures"][0]["kind"] == "aggregate");

  // All ingestion happened in interval 5; only closed intervals are reported.
  r = f.call("GET", "/metrics", nullptr, {{"cursor", "5"}});
  CHECK(r.body["intervals"].empty());
  f.clock = 6'000;
  r = f.call("GET", "/metrics", nullptr, {{"cursor", "5"}});
  REQUIRE(r.body["intervals"].size() == 1);
  const auto& row = r.body["intervals"][0];
  CHECK(row["ingested"] == 200);
  CHECK(row["units"].get<double>() > 0);
  CHECK(row["dprs"].size() == 2);
  CHECK(r.body["next_cursor"] == 6);

  CHECK(f.call("GET", "/manager").body["mode"] == "manual");
  CHECK(f.call("POST", "/manager", json{{"mode", "auto"}}).body["mode"] == "auto");
  r = f.call("GET", "/manager");
  CHECK(r.body["mode"] == "auto");
  CHECK(r.body.contains("forecast"));
  CHECK(r.body.contains("candidates"));

  r = f.call("POST", "/fusion", json{{"level", 2}});
  REQUIRE(r.status == 200);
  CHECK(f.call("GET", "/stream/status").body["fusion_level"] == 2);
  CHECK(f.call("GET", "/stream/status").body["hi_watermark"] == 200);
}

TEST_CASE("http server round trip") {
  Fixture f;
  HttpServer server(*f.engine);
  const int port = server.bind_any("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });

  httplib::Client cli("127.0.0.1", port);
  std::string nd;
  for (std::size_t i = 0; i < 50; ++i) nd += f.ev[i] + "\n";
  auto res = cli.Post("/ingest", nd, "application/x-ndjson");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["accepted"] == 50);

  res = cli.Post("/dprs", index_spec_json("idx", "actor.login").dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

  res = cli.Get("/registry?kind=hash_index");
  REQUIRE(res);
  CHECK(json::parse(res->body)["structures"].size() == 1);

  res = cli.Get("/missing");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["code"].is_string());

  res = cli.Options("/dprs");
  REQUIRE(res);
  CHECK(res->status < 300);
  CHECK(res->get_header_value("Access-Control-Allow-Methods").find("DELETE") != std::string::npos);

  server.stop();
  t.join();
}
