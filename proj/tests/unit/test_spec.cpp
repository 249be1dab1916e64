// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "fluid/dpr/catalog.hpp"
#include "fluid/dpr/spec.hpp"
#include "helpers.hpp"

using namespace fluid;
using test::eq;
using test::node;

namespace {

std::string validation_error(const DprSpec& s) {
  try {
    validate(s);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    return e.what();
  }
  return "";
}

DprSpec index_on(const std::string& field) { return make_index_spec("idx", field); }

}  // namespace

TEST_CASE("builders produce valid specs with the expected descriptors") {
  auto idx = make_index_spec("i", "repo.id", {eq("type", "PushEvent")});
  CHECK_NOTHROW(validate(idx));
  const auto d = sink_descriptor(idx, sinks(idx).front()->id);
  CHECK(d.kind == StructureKind::HashIndex);
  CHECK(d.field == "repo.id");
  REQUIRE(d.filters.size() == 1);
  CHECK(d.filters[0].value == "PushEvent");

  auto pf = make_prefilter_spec("p", {eq("repo.id", "7")}, {"actor.login"});
  CHECK_NOTHROW(validate(pf));
  CHECK(sink_descriptor(pf, sinks(pf).front()->id).stored_fields == std::vector<std::string>{"actor.login"});

  auto agg = make_aggregate_spec("a", "repo.name", {eq("type", "PullRequestEvent")}, 512);
  CHECK_NOTHROW(validate(agg));
  const auto ad = sink_descriptor(agg, sinks(agg).front()->id);
  CHECK(ad.group_by == "repo.name");
  CHECK(ad.bucket_records == 512);
}

TEST_CASE("validation names the offending node") {
  auto s = index_on("repo.id");
  s.nodes.back().params = {{"field", "actor.login"}};  // never parsed
  CHECK(validation_error(s).find(s.nodes.back().id) != std::string::npos);

  auto two_sources = index_on("repo.id");
  two_sources.nodes.push_back(node("src2", OpKind::Source, ""));
  CHECK_FALSE(validation_error(two_sources).empty());

  auto dangling = index_on("repo.id");
  dangling.nodes.back().inputs = {"nope"};
  CHECK(validation_error(dangling).find("nope") != std::string::npos);

  auto leaf = index_on("repo.id");
  auto extra = node("extra", OpKind::Filter, leaf.nodes[1].id);
  extra.predicate = eq("repo.id", "1");
  leaf.nodes.push_back(extra);
  CHECK(validation_error(leaf).find("extra") != std::string::npos);

  auto cyc = index_on("repo.id");
  cyc.nodes[1].inputs = {cyc.nodes.back().id};
  CHECK_FALSE(validation_error(cyc).empty());

  auto projected = test::comment_flag_spec("x", {"a"}, "flag", 1);
  auto proj = node("proj", OpKind::Project, "kw");
  proj.fields = {"type"};
  projected.nodes.insert(projected.nodes.end() - 1, proj);
  projected.nodes.back().inputs = {"proj"};
  CHECK(validation_error(projected).find("sink") != std::string::npos);

  auto bad_fn = test::comment_flag_spec("x", {"a"}, "flag", 1);
  bad_fn.nodes[3].token = "sentiment";
  CHECK(validation_error(bad_fn).find("tok") != std::string::npos);

  auto bad_rounds = test::comment_flag_spec("x", {"a"}, "flag", 1);
  bad_rounds.nodes[3].params["rounds"] = 0;
  CHECK_FALSE(validation_error(bad_rounds).empty());
}

TEST_CASE("transform output feeds later operators") {
  auto s = test::comment_flag_spec("x", {"a"}, "flag", 2);
  CHECK_NOTHROW(validate(s));
  const auto d = sink_descriptor(s, "sink");
  CHECK(d.derived);
  CHECK(d.field == "flag");
}

TEST_CASE("json round trip preserves structure and signatures") {
  for (const auto& s : test::fusion_pair(3)) {
    const auto back = spec_from_json(to_json(s));
    REQUIRE(back.nodes.size() == s.nodes.size());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      CHECK(back.nodes[i].signature() == s.nodes[i].signature());
      CHECK(back.nodes[i].inputs == s.nodes[i].inputs);
    }
    CHECK(spec_shape_key(back) == spec_shape_key(s));
  }
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"id":"x"})")), Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"nodes":[{"id":"a","kind":"warp"}]})")), Error);
  CHECK(parse_op_kind("ParseFields") == OpKind::ParseFields);
}

TEST_CASE("unit costs") {
  auto s = test::comment_flag_spec("x", {"a"}, "flag", 3);
  // parse 5, filter 1, tokenize 4+4*3, keyword 2, sink 2
  CHECK(static_unit_cost(s) == doctest::Approx(26));
  CHECK(static_unit_cost(make_index_spec("i", "repo.id")) == doctest::Approx(7));
}

TEST_CASE("catalog transforms") {
  std::string out;
  auto lower = find_transform("lowercase")->make({});
  CHECK(lower->apply("HeLLo", out));
  CHECK(out == "hello");
  auto tok = find_transform("tokenize")->make({{"rounds", 2}});
  CHECK(tok->apply("Crashing, CRASHES; crashed!", out));
  CHECK(out.find("crash") != std::string::npos);
  auto kw = find_transform("keyword_flag")->make({{"keywords", {"crash"}}});
  CHECK(kw->apply("a crash here", out));
  CHECK(out == "true");
  CHECK(kw->apply("all good", out));
  CHECK(out == "false");
  auto hm = find_transform("hash_mod")->make({{"mod", 4}});
  CHECK(hm->apply("abc", out));
  CHECK(std::stoi(out) < 4);
  auto lb = find_transform("length_bucket")->make({{"width", 10}});
  CHECK(lb->apply("0123456789abc", out));
  CHECK(out == "10");
  CHECK(find_transform("nope") == nullptr);
  CHECK(find_transform("tokenize")->unit_cost({{"rounds", 5}}) == doctest::Approx(24));
}
