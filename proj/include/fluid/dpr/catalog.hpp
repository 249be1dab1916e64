// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fluid {

class TransformFn {
 public:
  virtual ~TransformFn() = default;
  // false means the input could not be transformed; the record is skipped.
  virtual bool apply(std::string_view input, std::string& out) const = 0;
};

// Built-in Transform functions keyed by identity token. Two Transform nodes
// are the same computation iff token and params are equal.
struct CatalogEntry {
  std::string token;
  std::string description;
  double (*unit_cost)(const nlohmann::json& params);
  std::unique_ptr<TransformFn> (*make)(const nlohmann::json& params);
  // Extra params the entry requires besides input/output.
  std::vector<std::string> required;
};

const CatalogEntry* find_transform(std::string_view token);
const std::vector<CatalogEntry>& transform_catalog();

}  // namespace fluid
