// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fluid/query/query.hpp"
#include "fluid/stream/raw_log.hpp"
#include "fluid/structures/structures.hpp"

namespace fluid {

// Ground truth: every visible record is fully parsed with a general JSON
// parser, filtered on event_ts and predicates, and group-counted. Shares no
// code with the planner or the field extractor. Unparseable records are
// skipped.
GroupCounts raw_oracle_counts(const Query& q, const EventWindow& w, const LogSnapshot& log);
std::vector<RankedRow> raw_oracle(const Query& q, const EventWindow& w, const LogSnapshot& log);

}  // namespace fluid
