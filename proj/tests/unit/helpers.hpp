// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "fluid/dpr/spec.hpp"
#include "fluid/query/query.hpp"
#include "fluid/scenario/generator.hpp"
#include "fluid/stream/raw_log.hpp"

namespace fluid::test {

// Small deterministic GH-like stream.
inline std::vector<std::string> events(std::uint64_t seed, int hours, double per_hour) {
  GeneratorParams p;
  p.seed = seed;
  p.hours = hours;
  p.rate_curve = {per_hour};
  p.repos = 300;
  p.actors = 800;
  p.orgs = 40;
  p.spike_repo_rank = 50;
  p.spike_from_hour = 0;
  p.spike_to_hour = hours;
  p.spam_actor_rank = 100;
  p.spam_share = 0.01;
  EventGenerator g(p);
  std::vector<std::string> out;
  std::string line;
  while (g.next(line)) out.push_back(line);
  return out;
}

inline void fill(RawLog& log, const std::vector<std::string>& ev) {
  for (const auto& e : ev) log.ingest(e, 0);
}

inline Query query(std::vector<FilterPredicate> preds, std::string group_by, std::size_t k = 10,
                   EventWindow w = EventWindow::all()) {
  Query q;
  q.window.absolute = w;
  q.predicates = std::move(preds);
  q.group_by = std::move(group_by);
  q.top_k = k;
  return q;
}

inline FilterPredicate eq(std::string f, std::string v) { return {std::move(f), CompareOp::Eq, std::move(v)}; }

inline OperatorNode node(std::string id, OpKind kind, std::string input) {
  OperatorNode n;
  n.id = std::move(id);
  n.kind = kind;
  if (!input.empty()) n.inputs = {std::move(input)};
  return n;
}

}  // namespace fluid::test

namespace fluid::test {

// Comment-analysis DPR: parse, keep IssueCommentEvents, tokenize the body,
// flag keywords, index the flag. Two of these differ only in the keyword step.
inline DprSpec comment_flag_spec(std::string id, std::vector<std::string> keywords, std::string flag_field,
                                 int rounds) {
  DprSpec s;
  s.id = std::move(id);
  s.nodes.push_back(node("src", OpKind::Source, ""));
  auto parse = node("parse", OpKind::ParseFields, "src");
  parse.fields = {"payload.comment.body", "type"};
  s.nodes.push_back(parse);
  auto f = node("only_comments", OpKind::Filter, "parse");
  f.predicate = eq("type", "IssueCommentEvent");
  s.nodes.push_back(f);
  auto tok = node("tok", OpKind::Transform, "only_comments");
  tok.token = "tokenize";
  tok.params = {{"input", "payload.comment.body"}, {"output", "tokens"}, {"rounds", rounds}};
  s.nodes.push_back(tok);
  auto kw = node("kw", OpKind::Transform, "tok");
  kw.token = "keyword_flag";
  kw.params = {{"input", "tokens"}, {"output", flag_field}, {"keywords", keywords}};
  s.nodes.push_back(kw);
  auto sink = node("sink", OpKind::Sink, "kw");
  sink.structure = StructureKind::HashIndex;
  sink.params = {{"field", flag_field}};
  s.nodes.push_back(sink);
  return s;
}

inline std::vector<DprSpec> fusion_pair(int rounds) {
  return {comment_flag_spec("toxic", {"stupid", "garbage", "spam"}, "toxic", rounds),
          comment_flag_spec("bugreport", {"crash", "repro", "panic", "leak"}, "bug", rounds)};
}

}  // namespace fluid::test
