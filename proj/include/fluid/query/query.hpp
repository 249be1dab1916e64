// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/predicate.hpp"
#include "fluid/types.hpp"

namespace fluid {

// Event-time window, either relative to "now" (latest ingested event_ts) or
// absolute.
struct QueryWindow {
  std::optional<double> relative_hours;
  std::optional<EventWindow> absolute;

  // Relative windows cover (now - h, now], i.e. [now - h + 1ms, now + 1ms).
  EventWindow resolve(TimestampMs now) const;
};

struct Query {
  QueryWindow window;
  std::vector<FilterPredicate> predicates;  // conjunction
  std::string group_by;
  std::size_t top_k = 10;

  // Shape with predicate constants replaced by slots.
  std::string template_key() const;
  nlohmann::json to_json() const;
};

// {window:{relative_hours|abs_range:{from,to}}, predicates:[{field,eq}],
//  group_by, agg:"count", top_k}. Throws Error(InvalidArgument).
Query query_from_json(const nlohmann::json& j);

}  // namespace fluid
