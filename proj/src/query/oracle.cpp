// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/query/oracle.hpp"

#include <json.hpp>

namespace fluid {

namespace {

const nlohmann::json* resolve(const nlohmann::json& doc, const std::string& path) {
  const nlohmann::json* cur = &doc;
  std::size_t b = 0;
  while (true) {
    const std::size_t e = path.find('.', b);
    const std::string key = path.substr(b, e == std::string::npos ? std::string::npos : e - b);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (e == std::string::npos) return cur;
    b = e + 1;
  }
}

}  // namespace

GroupCounts raw_oracle_counts(const Query& q, const EventWindow& w, const LogSnapshot& log) {
  GroupCounts counts;
  log.scan({0, log.hi()}, [&](const RawEvent& e) {
    if (!w.contains(e.event_ts)) return;
    nlohmann::json doc = nlohmann::json::parse(e.payload, nullptr, false);
    if (doc.is_discarded()) return;
    for (const auto& p : q.predicates) {
      const nlohmann::json* v = resolve(doc, p.field);
      if (!v || !p.eval(canonical_value(*v))) return;
    }
    const nlohmann::json* g = resolve(doc, q.group_by);
    if (!g) return;
    ++counts[canonical_value(*g)];
  });
  return counts;
}

std::vector<RankedRow> raw_oracle(const Query& q, const EventWindow& w, const LogSnapshot& log) {
  return top_k(raw_oracle_counts(q, w, log), q.top_k);
}

}  // namespace fluid
