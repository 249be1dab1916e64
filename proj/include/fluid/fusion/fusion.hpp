// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/dpr/spec.hpp"

namespace fluid {

// Level 0: one shared source, DAGs otherwise disjoint.
// Level 1: shared ParseFields/Filter prefixes (filter runs canonically sorted).
// Level 2: every structurally identical node merged, identical sinks become
//          one sink that fans out to each owner's structure.
enum class FusionLevel : int { Concat = 0, Prefix = 1, Full = 2 };

FusionLevel fusion_level_from_int(int level);

struct Provenance {
  std::size_t spec = 0;  // index into the fused spec list
  std::string node;      // operator id inside that spec
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct FusedNode {
  OperatorNode op;                   // id rewritten to "n<index>", inputs cleared
  int parent = -1;                   // -1 for the source
  std::vector<int> children;
  std::vector<Provenance> provenance;
  std::vector<std::size_t> serves;   // specs with a sink at or below this node, sorted
  std::vector<std::size_t> targets;  // sinks: indices into FusedDag::targets
};

struct SinkTarget {
  std::size_t spec = 0;
  std::string node;
};

struct FusedDag {
  FusionLevel level = FusionLevel::Concat;
  std::size_t spec_count = 0;
  std::vector<FusedNode> nodes;  // parents precede children; nodes[0] is the source
  std::vector<SinkTarget> targets;

  std::size_t count(OpKind k) const;
};

// Pure function of (specs, level). Specs are assumed valid.
FusedDag fuse(std::span<const DprSpec> specs, FusionLevel level);

// Per-filter pass rates keyed by FilterPredicate::key(); missing keys pass
// everything.
using SelectivityProfile = std::map<std::string, double>;

// Expected units per input record.
double dag_cost(const FusedDag& dag, const SelectivityProfile& sel = {});
double spec_cost(const DprSpec& spec, const SelectivityProfile& sel = {});

// Expected units per record attributable to each spec when costs of shared
// nodes are split evenly among the specs they serve.
std::vector<double> attributed_costs(const FusedDag& dag, const SelectivityProfile& sel = {});

nlohmann::json fusedump(const FusedDag& dag, std::span<const DprSpec> specs);

}  // namespace fluid
