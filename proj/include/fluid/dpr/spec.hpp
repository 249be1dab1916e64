// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fluid/predicate.hpp"
#include "fluid/structures/structures.hpp"

namespace fluid {

enum class OpKind { Source, ParseFields, Filter, Project, Transform, Sink };

inline constexpr std::size_t kOpKindCount = 6;

const char* op_kind_name(OpKind k);
OpKind parse_op_kind(std::string_view s);

struct OperatorNode {
  std::string id;
  OpKind kind = OpKind::Source;
  std::vector<std::string> fields;    // ParseFields, Project
  FilterPredicate predicate;          // Filter
  std::string token;                  // Transform: catalog identity token
  nlohmann::json params = nlohmann::json::object();  // Transform / Sink parameters
  StructureKind structure = StructureKind::HashIndex;  // Sink
  std::vector<std::string> inputs;

  // Structural identity: kind and canonical parameters, inputs excluded.
  std::string signature() const;
  double unit_cost() const;
};

struct DprSpec {
  std::string id;
  std::vector<OperatorNode> nodes;
  std::optional<double> declared_cost_hint;

  const OperatorNode* node(std::string_view id) const;
};

// Throws Error(InvalidArgument) with a diagnostic naming the offending node.
// A valid spec is a tree: one Source, every other node has exactly one
// input, every leaf is a Sink, and every field a node reads is produced by
// an upstream ParseFields/Transform and not projected away.
void validate(const DprSpec& spec);

// Structure descriptor of a Sink, with the Filter conjunction on its path.
StructureDescriptor sink_descriptor(const DprSpec& spec, std::string_view sink_id);

std::vector<const OperatorNode*> sinks(const DprSpec& spec);

// Sum of node unit costs assuming every filter passes.
double static_unit_cost(const DprSpec& spec);

// Wire format: {id, nodes:[{id, kind, params, inputs:[...]}], cost_hint?}.
nlohmann::json to_json(const DprSpec& spec);
nlohmann::json to_json(const OperatorNode& node);
DprSpec spec_from_json(const nlohmann::json& j);

// Canonical JSON text of a spec with the id blanked out; two specs doing the
// same work compare equal.
std::string spec_shape_key(const DprSpec& spec);

// Builders for the common single-purpose DPRs.
DprSpec make_index_spec(std::string id, const std::string& field, std::vector<FilterPredicate> filters = {});
DprSpec make_prefilter_spec(std::string id, std::vector<FilterPredicate> filters, std::vector<std::string> stored);
DprSpec make_aggregate_spec(std::string id, const std::string& group_by, std::vector<FilterPredicate> filters = {},
                            std::uint32_t bucket_records = 4096);

}  // namespace fluid
