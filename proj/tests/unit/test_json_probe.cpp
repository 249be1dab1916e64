// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>

#include "fluid/json_probe.hpp"
#include "fluid/predicate.hpp"
#include "helpers.hpp"

using namespace fluid;
using nlohmann::json;

namespace {

std::optional<std::string> oracle(const std::string& doc, const std::string& path) {
  const json j = json::parse(doc);
  const json* cur = &j;
  for (const auto& part : split_path(path)) {
    if (!cur->is_object() || !cur->contains(part)) return std::nullopt;
    cur = &(*cur)[part];
  }
  return canonical_value(*cur);
}

}  // namespace

TEST_CASE("extractor agrees with a full parse on generated events") {
  const std::vector<std::string> paths = {"type",
                                          "repo.id",
                                          "repo.name",
                                          "actor.login",
                                          "payload.action",
                                          "payload.comment.body",
                                          "payload.pull_request.base.repo.language",
                                          "org.login",
                                          "created_at",
                                          "public",
                                          "payload.size",
                                          "missing.field"};
  FieldExtractor fx(paths);
  std::vector<FieldValue> out(paths.size());
  for (const auto& ev : test::events(11, 1, 3000)) {
    fx.extract(ev, out);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto want = oracle(ev, paths[i]);
      REQUIRE(out[i].found == want.has_value());
      if (want) CHECK(out[i].value == *want);
    }
  }
}

TEST_CASE("escapes, nesting and odd spacing") {
  const std::string doc =
      R"({ "a" : { "b\"c" : 1, "x": [ {"y": "}"} , "]" ], "s" : "tab\tq\"uote\\ é🙂" },)"
      R"( "n": -1.5e3, "t": true, "z": null, "o": {"k": [1, 2]} })";
  CHECK(extract_field(doc, "a.s") == std::string("tab\tq\"uote\\ \xc3\xa9\xf0\x9f\x99\x82"));
  CHECK(extract_field(doc, "n") == std::string("-1.5e3"));
  CHECK(extract_field(doc, "t") == std::string("true"));
  CHECK(extract_field(doc, "z") == std::string("null"));
  CHECK(extract_field(doc, "o.k") == std::string("[1, 2]"));
  CHECK_FALSE(extract_field(doc, "a.x.y"));
  CHECK_FALSE(extract_field(doc, "a.b"));
  CHECK(extract_field(R"({"u":"\u00e9\ud83d\ude42"})", "u") == std::string("\xc3\xa9\xf0\x9f\x99\x82"));
}

TEST_CASE("malformed input never throws") {
  FieldExtractor fx({"a", "b.c"});
  std::vector<FieldValue> out(2);
  for (std::string bad : {"", "{", "{\"a\":", "{\"a\":\"x", "[1,2]", "{\"a\":1,,}", "garbage", "{\"b\":{\"c\":[}"}) {
    CHECK_NOTHROW(fx.extract(bad, out));
  }
  fx.extract("{\"a\":\"ok\",\"b\":{\"c\":", out);
  CHECK(out[0].found);
  CHECK(out[0].value == "ok");
  CHECK_FALSE(out[1].found);
}

TEST_CASE("timestamp probe") {
  CHECK(probe_timestamp_ms(R"({"created_at":"2015-01-01T15:04:05Z"})", "created_at") == 1420124645000);
  CHECK(probe_timestamp_ms(R"({"created_at":"2015-01-01T15:04:05.250Z"})", "created_at") == 1420124645250);
  CHECK(probe_timestamp_ms(R"({"created_at":"2015-01-01T16:04:05+01:00"})", "created_at") == 1420124645000);
  CHECK(probe_timestamp_ms(R"({"ts": 1234})", "ts") == 1234);
  // The last occurrence wins: nested objects come first in GH events.
  CHECK(probe_timestamp_ms(R"({"payload":{"created_at":"2000-01-01T00:00:00Z"},"created_at":"2015-01-01T00:00:00Z"})",
                           "created_at") == 1420070400000);
  CHECK_FALSE(probe_timestamp_ms(R"({"x":1})", "created_at"));
  CHECK_FALSE(probe_timestamp_ms(R"({"created_at":"yesterday"})", "created_at"));
}

TEST_CASE("iso8601 round trip") {
  for (std::int64_t ms : {0LL, 1420124645000LL, 951782400000LL, 4102444799000LL, -86400000LL})
    CHECK(parse_iso8601_ms(format_iso8601(ms)) == ms);
  CHECK(format_iso8601(1709251200000) == "2024-03-01T00:00:00Z");
}
