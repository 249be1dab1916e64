// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/registry.hpp"

namespace fluid {

using nlohmann::json;

Coverage RegistryEntry::coverage() const {
  Offset hi = processed_hi;
  if (deactivation) hi = std::min(hi, *deactivation);
  return Coverage(OffsetRange{activation, std::max(activation, hi)});
}

json RegistryEntry::to_json() const {
  json j;
  j["structure_id"] = structure_id;
  j["instance_id"] = instance_id;
  j["dpr_id"] = spec_id;
  j["sink"] = sink_node;
  j["owner"] = owner;
  j["kind"] = structure_kind_name(descriptor.kind);
  j["descriptor"] = descriptor.to_json();
  j["location"] = location();
  j["activation"] = activation;
  j["deactivation"] = deactivation ? json(*deactivation) : json(nullptr);
  json cov = json::array();
  for (const auto& r : coverage().intervals()) cov.push_back({r.lo, r.hi});
  j["coverage"] = cov;
  j["status"] = released ? "released" : stopped() ? "stopped" : "running";
  j["entries"] = structure && !released ? structure->entry_count() : 0;
  return j;
}

const RegistryEntry* RegistrySnapshot::find(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.structure_id == id) return &e;
  return nullptr;
}

std::vector<const RegistryEntry*> RegistrySnapshot::lookup(StructureKind kind, const std::string& key,
                                                           OffsetRange range) const {
  std::vector<const RegistryEntry*> out;
  for (const auto& e : entries_) {
    if (e.released || !e.structure || e.descriptor.kind != kind) continue;
    if (!key.empty() && e.descriptor.key() != key) continue;
    if (e.coverage().clip(range).empty()) continue;
    out.push_back(&e);
  }
  return out;
}

std::vector<const RegistryEntry*> RegistrySnapshot::lookup(StructureKind kind, const std::string& key,
                                                           const EventWindow& w, const LogSnapshot& log) const {
  return lookup(kind, key, log.window_extent(w));
}

std::vector<const RegistryEntry*> RegistrySnapshot::live() const {
  std::vector<const RegistryEntry*> out;
  for (const auto& e : entries_)
    if (!e.released && e.structure) out.push_back(&e);
  return out;
}

void Registry::add(RegistryEntry e) {
  std::lock_guard lk(mu_);
  for (const auto& x : entries_)
    if (x.structure_id == e.structure_id)
      throw Error(ErrorCode::AlreadyExists, "structure '" + e.structure_id + "' already registered");
  e.processed_hi = std::max(e.processed_hi, e.activation);
  entries_.push_back(std::move(e));
  ++version_;
}

void Registry::advance(const std::string& instance_id, Offset hi) {
  std::lock_guard lk(mu_);
  for (auto& e : entries_) {
    if (e.instance_id != instance_id) continue;
    Offset cap = e.deactivation ? *e.deactivation : hi;
    e.processed_hi = std::max(e.processed_hi, std::min(hi, cap));
  }
  ++version_;
}

void Registry::deactivate(const std::string& instance_id, Offset at) {
  std::lock_guard lk(mu_);
  for (auto& e : entries_)
    if (e.instance_id == instance_id && !e.deactivation) e.deactivation = std::max(at, e.activation);
  ++version_;
}

void Registry::release(const std::string& structure_id) {
  std::lock_guard lk(mu_);
  for (auto& e : entries_) {
    if (e.structure_id != structure_id) continue;
    if (!e.stopped()) throw Error(ErrorCode::FailedPrecondition, "structure '" + structure_id + "' is still running");
    e.released = true;
    e.structure.reset();
    ++version_;
    return;
  }
  throw Error(ErrorCode::NotFound, "no structure '" + structure_id + "'");
}

RegistrySnapshot Registry::snapshot() const {
  std::lock_guard lk(mu_);
  return RegistrySnapshot(entries_);
}

std::uint64_t Registry::version() const {
  std::lock_guard lk(mu_);
  return version_;
}

}  // namespace fluid
