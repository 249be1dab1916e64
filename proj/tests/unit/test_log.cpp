// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

#include <unistd.h>

#include "fluid/stream/event_source.hpp"
#include "fluid/stream/raw_log.hpp"
#include "fluid/stream/subscription.hpp"
#include "helpers.hpp"

using namespace fluid;
namespace fs = std::filesystem;

namespace {

std::string ev(std::int64_t ts, int i) {
  return "{\"i\":" + std::to_string(i) + ",\"ts\":" + std::to_string(ts) + "}";
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("fluid_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("offsets are dense and records read back intact") {
  LogOptions o;
  o.segment_records = 7;
  o.timestamp_key = "ts";
  RawLog log(o);
  for (int i = 0; i < 50; ++i) CHECK(log.ingest(ev(1000 + i, i), 5) == static_cast<Offset>(i));
  CHECK(log.hi_watermark() == 50);
  CHECK(log.segment_count() == 8);
  const auto snap = log.snapshot();
  for (int i = 0; i < 50; ++i) {
    auto e = snap.at(i);
    REQUIRE(e);
    CHECK(e->payload == ev(1000 + i, i));
    CHECK(e->event_ts == 1000 + i);
    CHECK(e->ingest_ts == 5);
  }
  CHECK_FALSE(snap.at(50));
  CHECK(log.latest_event_ts() == 1049);
}

TEST_CASE("records without a timestamp take the ingest time") {
  RawLog log;
  log.ingest("{\"x\":1}", 777);
  CHECK(log.snapshot().at(0)->event_ts == 777);
}

TEST_CASE("snapshots do not see later appends") {
  LogOptions o;
  o.segment_records = 4;
  o.timestamp_key = "ts";
  RawLog log(o);
  for (int i = 0; i < 6; ++i) log.ingest(ev(i, i), 0);
  const auto snap = log.snapshot();
  for (int i = 6; i < 20; ++i) log.ingest(ev(i, i), 0);
  std::size_t n = 0;
  snap.scan({0, 100}, [&](const RawEvent&) { ++n; });
  CHECK(n == 6);
  CHECK(snap.hi() == 6);
}

TEST_CASE("scan_window equals a brute-force filter on disordered input") {
  LogOptions o;
  o.segment_records = 16;
  o.timestamp_key = "ts";
  RawLog log(o);
  std::mt19937_64 rng(5);
  std::vector<std::int64_t> ts;
  for (int i = 0; i < 700; ++i) {
    ts.push_back(i * 10 + static_cast<std::int64_t>(rng() % 200) - 100);
    log.ingest(ev(ts.back(), i), 0);
  }
  const auto snap = log.snapshot();
  for (int iter = 0; iter < 200; ++iter) {
    const std::int64_t a = static_cast<std::int64_t>(rng() % 7200) - 100;
    EventWindow w{a, a + static_cast<std::int64_t>(rng() % 2000)};
    const Offset lo = rng() % 700;
    OffsetRange r{lo, lo + rng() % 400};
    std::vector<Offset> want, got;
    for (Offset k = r.lo; k < std::min<Offset>(r.hi, 700); ++k)
      if (w.contains(ts[k])) want.push_back(k);
    snap.scan_window(w, r, [&](const RawEvent& e) { got.push_back(e.offset); });
    CHECK(got == want);
    // The extent must contain every matching offset.
    const auto ext = snap.window_extent(w);
    for (Offset k = 0; k < 700; ++k)
      if (w.contains(ts[k])) CHECK(ext.contains(k));
  }
}

TEST_CASE("segments seal by age") {
  LogOptions o;
  o.segment_max_age_ms = 100;
  RawLog log(o);
  log.ingest("{}", 0);
  log.ingest("{}", 50);
  log.ingest("{}", 100);
  CHECK(log.segment_count() == 2);
  const auto infos = log.snapshot().segment_infos();
  CHECK(infos[0].sealed);
  CHECK(infos[0].range == OffsetRange{0, 2});
}

TEST_CASE("storage budget rejects instead of dropping") {
  LogOptions o;
  o.max_bytes = 10;
  RawLog log(o);
  log.ingest("12345", 0);
  log.ingest("12345", 0);
  try {
    log.ingest("1", 0);
    FAIL("expected StorageFull");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StorageFull);
  }
  CHECK(log.hi_watermark() == 2);
}

TEST_CASE("persisted log reopens with the same records") {
  const auto dir = temp_dir("reopen");
  LogOptions o;
  o.log_dir = dir.string();
  o.segment_records = 5;
  o.timestamp_key = "ts";
  {
    auto log = RawLog::open(o);
    for (int i = 0; i < 13; ++i) log->ingest(ev(100 + i, i), 1);
  }
  auto log = RawLog::open(o);
  CHECK(log->hi_watermark() == 13);
  const auto snap = log->snapshot();
  for (int i = 0; i < 13; ++i) {
    CHECK(snap.at(i)->payload == ev(100 + i, i));
    CHECK(snap.at(i)->event_ts == 100 + i);
  }
  CHECK(log->ingest(ev(200, 13), 1) == 13);
  fs::remove_all(dir);
}

TEST_CASE("subscription is pull based and never blocks ingest") {
  RawLog log;
  auto slow = log.subscribe("slow", 0);
  auto fast = log.subscribe("fast", 0);
  for (int i = 0; i < 1000; ++i) log.ingest("{}", 0);
  CHECK(slow->lag() == 1000);
  std::vector<RawEvent> batch;
  std::size_t got = 0;
  while (std::size_t n = fast->poll(batch, 64)) {
    CHECK(batch.front().offset == got);
    got += n;
  }
  CHECK(got == 1000);
  CHECK(fast->lag() == 0);
  CHECK(slow->poll(batch, 10) == 10);
  slow->cancel();
  CHECK(slow->poll(batch, 10) == 0);
  REQUIRE(slow->final_offset());
  CHECK(*slow->final_offset() == 10);
}

TEST_CASE("poll waits for new records") {
  RawLog log;
  auto sub = log.subscribe("c");
  std::thread producer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    log.ingest("{}", 0);
  });
  std::vector<RawEvent> batch;
  CHECK(sub->poll(batch, 8, std::chrono::milliseconds(2000)) == 1);
  producer.join();
}

TEST_CASE("ndjson round trip, plain and gzip") {
  const auto dir = temp_dir("ndjson");
  fs::create_directories(dir);
  for (const std::string name : {"a.jsonl", "a.jsonl.gz"}) {
    const auto path = (dir / name).string();
    {
      NdjsonWriter w(path);
      for (int i = 0; i < 3000; ++i) w.write(ev(i, i));
    }
    NdjsonReader r(path);
    int i = 0;
    while (auto line = r.next()) {
      CHECK(*line == ev(i, i));
      ++i;
    }
    CHECK(i == 3000);
  }
  fs::remove_all(dir);
}
