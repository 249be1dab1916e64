// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fluid/predicate.hpp"
#include "fluid/structures/coverage.hpp"
#include "fluid/types.hpp"

namespace fluid {

enum class StructureKind { HashIndex, PreFilteredLog, MaterializedAggregate };

const char* structure_kind_name(StructureKind k);
StructureKind parse_structure_kind(std::string_view s);

// What a structure holds, independent of which DPR instance built it. The
// filter conjunction comes from the Filter operators upstream of the sink.
struct StructureDescriptor {
  StructureKind kind = StructureKind::HashIndex;
  std::string field;                        // hash index key
  std::string group_by;                     // materialized aggregate
  std::vector<std::string> stored_fields;   // pre-filtered log projection
  std::vector<FilterPredicate> filters;     // sorted conjunction
  std::uint32_t bucket_records = 4096;      // aggregate bucket width in offsets
  bool derived = false;                     // depends on Transform output

  // Canonical "kind + parameters" string, used as the registry lookup key.
  std::string key() const;
  nlohmann::json to_json() const;

  friend bool operator==(const StructureDescriptor&, const StructureDescriptor&) = default;
};

using GroupCounts = std::unordered_map<std::string, std::uint64_t>;

struct RankedRow {
  std::string key;
  std::uint64_t count = 0;
  friend bool operator==(const RankedRow&, const RankedRow&) = default;
};

// Key-wise sum. Parts must come from disjoint record sets.
GroupCounts merge_aggregates(std::span<const GroupCounts> parts);
void merge_into(GroupCounts& into, const GroupCounts& part);

// Count descending, key ascending, first k.
std::vector<RankedRow> top_k(const GroupCounts& counts, std::size_t k);

// Base for DPR-built structures. Single writer (the sink of the owning
// instance) holding write_lock(); any number of readers under read_lock().
// Readers must clip to the coverage they pinned because the writer may be
// appending beyond it.
class Structure {
 public:
  Structure(std::string id, StructureDescriptor d) : id_(std::move(id)), desc_(std::move(d)) {}
  virtual ~Structure() = default;

  const std::string& id() const { return id_; }
  const StructureDescriptor& descriptor() const { return desc_; }
  StructureKind kind() const { return desc_.kind; }

  std::shared_lock<std::shared_mutex> read_lock() const { return std::shared_lock(mu_); }
  std::unique_lock<std::shared_mutex> write_lock() { return std::unique_lock(mu_); }

  void seal() { sealed_.store(true, std::memory_order_release); }
  bool sealed() const { return sealed_.load(std::memory_order_acquire); }

  // Sorted, deterministic dump of everything stored with offset in `clip`.
  virtual nlohmann::json dump(const OffsetRange& clip) const = 0;
  virtual std::size_t entry_count() const = 0;

 protected:
  void check_writable() const;

 private:
  std::string id_;
  StructureDescriptor desc_;
  mutable std::shared_mutex mu_;
  std::atomic<bool> sealed_{false};
};

class HashIndexStructure : public Structure {
 public:
  using Structure::Structure;

  void add(Offset o, std::string_view key);

  // Whole posting list (ascending); empty span when absent.
  std::span<const Offset> postings(std::string_view value) const;
  // Postings of `value` inside `clip`.
  std::vector<Offset> probe(std::string_view value, const Coverage& clip) const;
  std::size_t count_in(std::string_view value, const OffsetRange& r) const;
  std::size_t distinct_keys() const { return postings_.size(); }

  nlohmann::json dump(const OffsetRange& clip) const override;
  std::size_t entry_count() const override { return entries_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, std::vector<Offset>, Hash, std::equal_to<>> postings_;
  std::size_t entries_ = 0;
};

class PreFilteredLog : public Structure {
 public:
  PreFilteredLog(std::string id, StructureDescriptor d);

  // values[i] is stored_fields[i]; nullptr marks a missing field.
  void add(Offset o, TimestampMs event_ts, std::span<const std::string* const> values);

  std::size_t size() const { return offsets_.size(); }
  // First entry index with offset >= o.
  std::size_t lower_bound(Offset o) const;
  std::size_t count_in(const OffsetRange& r) const { return lower_bound(r.hi) - lower_bound(r.lo); }
  Offset offset_at(std::size_t i) const { return offsets_[i]; }
  TimestampMs event_ts_at(std::size_t i) const { return event_ts_[i]; }
  // Stored value of field column `f` for entry i, nullptr when missing.
  const std::string* value_at(std::size_t i, std::size_t f) const;
  // Column index of `field` in stored_fields, -1 when not stored.
  int column_of(std::string_view field) const;

  nlohmann::json dump(const OffsetRange& clip) const override;
  std::size_t entry_count() const override { return offsets_.size(); }

 private:
  std::size_t width_;
  std::vector<Offset> offsets_;
  std::vector<TimestampMs> event_ts_;
  std::vector<std::string> values_;    // row-major, width_ per entry
  std::vector<std::uint8_t> present_;  // row-major
};

class MaterializedAggregate : public Structure {
 public:
  struct Bucket {
    std::uint64_t records = 0;
    TimestampMs min_event_ts = 0;
    TimestampMs max_event_ts = 0;
    GroupCounts counts;
  };

  MaterializedAggregate(std::string id, StructureDescriptor d);

  void add(Offset o, TimestampMs event_ts, std::string_view key);

  std::uint32_t bucket_width() const { return width_; }
  // Offsets represented by bucket k: [k*w, (k+1)*w).
  OffsetRange bucket_range(std::uint64_t k) const { return {k * width_, (k + 1) * width_}; }
  // nullptr when nothing was counted into bucket k.
  const Bucket* bucket(std::uint64_t k) const;
  const std::map<std::uint64_t, Bucket>& buckets() const { return buckets_; }

  nlohmann::json dump(const OffsetRange& clip) const override;
  std::size_t entry_count() const override { return records_; }

 private:
  std::uint32_t width_;
  std::map<std::uint64_t, Bucket> buckets_;
  std::uint64_t records_ = 0;
};

std::shared_ptr<Structure> make_structure(std::string id, const StructureDescriptor& d);

}  // namespace fluid
