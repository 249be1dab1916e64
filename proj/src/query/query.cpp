// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/query/query.hpp"

#include <cmath>

#include "fluid/json_probe.hpp"

namespace fluid {

using nlohmann::json;

namespace {

TimestampMs time_value(const json& v, const char* what) {
  if (v.is_number_integer()) return v.get<TimestampMs>();
  if (v.is_string()) {
    if (auto t = parse_iso8601_ms(v.get<std::string>())) return *t;
  }
  throw Error(ErrorCode::InvalidArgument, std::string("window ") + what + " must be epoch ms or ISO-8601");
}

}  // namespace

EventWindow QueryWindow::resolve(TimestampMs now) const {
  if (absolute) return *absolute;
  const double h = relative_hours.value_or(0);
  const auto span = static_cast<TimestampMs>(std::llround(h * 3'600'000.0));
  return {now - span + 1, now + 1};
}

std::string Query::template_key() const {
  json j;
  json preds = json::array();
  for (const auto& p : normalize_conjunction(predicates)) preds.push_back({p.field, compare_op_name(p.op)});
  j["predicates"] = preds;
  j["group_by"] = group_by;
  if (window.absolute) {
    j["window"] = "absolute";
  } else {
    j["window_hours"] = window.relative_hours.value_or(0);
  }
  return j.dump();
}

json Query::to_json() const {
  json j;
  if (window.absolute) {
    j["window"] = {{"abs_range", {{"from", window.absolute->from}, {"to", window.absolute->to}}}};
  } else {
    j["window"] = {{"relative_hours", window.relative_hours.value_or(0)}};
  }
  json preds = json::array();
  for (const auto& p : predicates) preds.push_back(fluid::to_json(p));
  j["predicates"] = preds;
  j["group_by"] = group_by;
  j["agg"] = "count";
  j["top_k"] = top_k;
  return j;
}

Query query_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "query must be a JSON object");
  Query q;
  try {
    auto w = j.find("window");
    if (w == j.end() || !w->is_object()) throw Error(ErrorCode::InvalidArgument, "query needs a 'window' object");
    if (auto rh = w->find("relative_hours"); rh != w->end()) {
      if (!rh->is_number() || rh->get<double>() <= 0)
        throw Error(ErrorCode::InvalidArgument, "relative_hours must be a positive number");
      q.window.relative_hours = rh->get<double>();
    } else {
      const json& r = w->contains("abs_range") ? w->at("abs_range") : *w;
      if (!r.is_object() || !r.contains("from") || !r.contains("to"))
        throw Error(ErrorCode::InvalidArgument, "window needs relative_hours or abs_range {from, to}");
      EventWindow ew{time_value(r.at("from"), "from"), time_value(r.at("to"), "to")};
      if (ew.empty()) throw Error(ErrorCode::InvalidArgument, "window is empty");
      q.window.absolute = ew;
    }
    if (auto p = j.find("predicates"); p != j.end()) {
      if (!p->is_array()) throw Error(ErrorCode::InvalidArgument, "predicates must be an array");
      for (const auto& e : *p) q.predicates.push_back(predicate_from_json(e));
    }
    auto g = j.find("group_by");
    if (g == j.end() || !g->is_string() || g->get<std::string>().empty())
      throw Error(ErrorCode::InvalidArgument, "query needs a 'group_by' field path");
    q.group_by = g->get<std::string>();
    if (auto a = j.find("agg"); a != j.end() && *a != "count")
      throw Error(ErrorCode::InvalidArgument, "only agg \"count\" is supported");
    if (auto k = j.find("top_k"); k != j.end()) {
      if (!k->is_number_integer() || k->get<long long>() < 1)
        throw Error(ErrorCode::InvalidArgument, "top_k must be a positive integer");
      q.top_k = k->get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad query: ") + e.what());
  }
  return q;
}

}  // namespace fluid
