// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/stream/raw_log.hpp"
#include "fluid/structures/coverage.hpp"
#include "fluid/structures/structures.hpp"

namespace fluid {

struct RegistryEntry {
  std::string structure_id;  // "<instance>/<sink node>"
  std::string instance_id;
  std::string spec_id;
  std::string sink_node;
  std::string owner;         // "user" or "manager"
  StructureDescriptor descriptor;
  Offset activation = 0;
  std::optional<Offset> deactivation;
  Offset processed_hi = 0;   // everything in [activation, processed_hi) is in the structure
  bool released = false;     // data dropped; entry kept for history
  std::shared_ptr<Structure> structure;

  Coverage coverage() const;
  // Finished: deactivated and the runtime has processed up to the end.
  bool stopped() const { return deactivation && processed_hi >= *deactivation; }
  std::string location() const { return "memory:" + structure_id; }
  nlohmann::json to_json() const;
};

// Immutable view handed to readers. Coverage of every entry is fixed at
// snapshot time even while the runtime keeps appending.
class RegistrySnapshot {
 public:
  RegistrySnapshot() = default;
  explicit RegistrySnapshot(std::vector<RegistryEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  const RegistryEntry* find(const std::string& structure_id) const;

  // Live (not released) entries of `kind` whose descriptor key equals `key`
  // (any key when empty) and whose coverage meets `range`.
  std::vector<const RegistryEntry*> lookup(StructureKind kind, const std::string& key, OffsetRange range) const;
  std::vector<const RegistryEntry*> lookup(StructureKind kind, const std::string& key, const EventWindow& w,
                                           const LogSnapshot& log) const;
  std::vector<const RegistryEntry*> live() const;

 private:
  std::vector<RegistryEntry> entries_;
};

// Append-only catalog of structures built by DPR instances.
class Registry {
 public:
  void add(RegistryEntry e);
  void advance(const std::string& instance_id, Offset processed_hi);
  void deactivate(const std::string& instance_id, Offset at);
  // Frees the data of a stopped structure. The entry stays, marked released.
  void release(const std::string& structure_id);

  RegistrySnapshot snapshot() const;
  std::uint64_t version() const;

 private:
  mutable std::mutex mu_;
  std::vector<RegistryEntry> entries_;
  std::uint64_t version_ = 0;
};

}  // namespace fluid
