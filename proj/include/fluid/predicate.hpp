// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fluid {

enum class CompareOp { Eq, Ne };

const char* compare_op_name(CompareOp op);
CompareOp parse_compare_op(std::string_view s);

// field <op> constant, compared on canonical value text.
struct FilterPredicate {
  std::string field;
  CompareOp op = CompareOp::Eq;
  std::string value;

  bool eval(std::string_view v) const { return op == CompareOp::Eq ? v == value : v != value; }
  std::string key() const;

  auto operator<=>(const FilterPredicate&) const = default;
};

// Canonical text of a JSON constant: strings unquoted, everything else dumped.
std::string canonical_value(const nlohmann::json& v);

// True when every record satisfying the equality conjunction `preds` also
// satisfies `c`.
bool implied_by(const FilterPredicate& c, std::span<const FilterPredicate> preds);

// Sorted, duplicate-free conjunction.
std::vector<FilterPredicate> normalize_conjunction(std::vector<FilterPredicate> preds);

nlohmann::json to_json(const FilterPredicate& p);
FilterPredicate predicate_from_json(const nlohmann::json& j);

}  // namespace fluid
