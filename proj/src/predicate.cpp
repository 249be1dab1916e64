// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/predicate.hpp"

#include <algorithm>

#include "fluid/types.hpp"

namespace fluid {

const char* compare_op_name(CompareOp op) { return op == CompareOp::Eq ? "eq" : "ne"; }

CompareOp parse_compare_op(std::string_view s) {
  if (s == "eq" || s == "==" || s == "=") return CompareOp::Eq;
  if (s == "ne" || s == "!=") return CompareOp::Ne;
  throw Error(ErrorCode::InvalidArgument, "unknown comparator '" + std::string(s) + "'");
}

std::string FilterPredicate::key() const { return field + (op == CompareOp::Eq ? "==" : "!=") + value; }

std::string canonical_value(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool implied_by(const FilterPredicate& c, std::span<const FilterPredicate> preds) {
  for (const auto& p : preds) {
    if (p == c) return true;
    if (p.op != CompareOp::Eq || p.field != c.field) continue;
    if (c.op == CompareOp::Eq && p.value == c.value) return true;
    if (c.op == CompareOp::Ne && p.value != c.value) return true;
  }
  return false;
}

std::vector<FilterPredicate> normalize_conjunction(std::vector<FilterPredicate> preds) {
  std::sort(preds.begin(), preds.end());
  preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
  return preds;
}

nlohmann::json to_json(const FilterPredicate& p) {
  return {{"field", p.field}, {"op", compare_op_name(p.op)}, {"value", p.value}};
}

FilterPredicate predicate_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "predicate must be an object");
  FilterPredicate p;
  p.field = j.at("field").get<std::string>();
  if (j.contains("eq")) {
    p.op = CompareOp::Eq;
    p.value = canonical_value(j["eq"]);
  } else if (j.contains("ne")) {
    p.op = CompareOp::Ne;
    p.value = canonical_value(j["ne"]);
  } else {
    p.op = parse_compare_op(j.value("op", std::string("eq")));
    if (!j.contains("value")) throw Error(ErrorCode::InvalidArgument, "predicate on '" + p.field + "' has no value");
    p.value = canonical_value(j["value"]);
  }
  if (p.field.empty()) throw Error(ErrorCode::InvalidArgument, "predicate field is empty");
  return p;
}

}  // namespace fluid
