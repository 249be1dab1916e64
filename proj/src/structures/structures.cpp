// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/structures/structures.hpp"

#include <algorithm>

namespace fluid {

const char* structure_kind_name(StructureKind k) {
  switch (k) {
    case StructureKind::HashIndex: return "hash_index";
    case StructureKind::PreFilteredLog: return "prefiltered_log";
    case StructureKind::MaterializedAggregate: return "aggregate";
  }
  return "unknown";
}

StructureKind parse_structure_kind(std::string_view s) {
  if (s == "hash_index") return StructureKind::HashIndex;
  if (s == "prefiltered_log") return StructureKind::PreFilteredLog;
  if (s == "aggregate") return StructureKind::MaterializedAggregate;
  throw Error(ErrorCode::InvalidArgument, "unknown structure kind '" + std::string(s) + "'");
}

nlohmann::json StructureDescriptor::to_json() const {
  nlohmann::json j{{"kind", structure_kind_name(kind)}};
  switch (kind) {
    case StructureKind::HashIndex: j["field"] = field; break;
    case StructureKind::PreFilteredLog: j["fields"] = stored_fields; break;
    case StructureKind::MaterializedAggregate:
      j["group_by"] = group_by;
      j["bucket_records"] = bucket_records;
      break;
  }
  auto fs = nlohmann::json::array();
  for (const auto& f : filters) fs.push_back(fluid::to_json(f));
  j["filters"] = fs;
  if (derived) j["derived"] = true;
  return j;
}

std::string StructureDescriptor::key() const { return to_json().dump(); }

void merge_into(GroupCounts& into, const GroupCounts& part) {
  for (const auto& [k, v] : part) into[k] += v;
}

GroupCounts merge_aggregates(std::span<const GroupCounts> parts) {
  GroupCounts out;
  for (const auto& p : parts) merge_into(out, p);
  return out;
}

std::vector<RankedRow> top_k(const GroupCounts& counts, std::size_t k) {
  std::vector<RankedRow> rows;
  rows.reserve(counts.size());
  for (const auto& [key, c] : counts) rows.push_back({key, c});
  auto better = [](const RankedRow& a, const RankedRow& b) {
    return a.count != b.count ? a.count > b.count : a.key < b.key;
  };
  if (rows.size() > k) {
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end(), better);
    rows.resize(k);
  } else {
    std::sort(rows.begin(), rows.end(), better);
  }
  return rows;
}

void Structure::check_writable() const {
  if (sealed()) throw Error(ErrorCode::FailedPrecondition, "structure " + id_ + " is sealed");
}

void HashIndexStructure::add(Offset o, std::string_view key) {
  check_writable();
  auto it = postings_.find(key);
  if (it == postings_.end()) it = postings_.emplace(std::string(key), std::vector<Offset>{}).first;
  it->second.push_back(o);
  ++entries_;
}

std::span<const Offset> HashIndexStructure::postings(std::string_view value) const {
  auto it = postings_.find(value);
  if (it == postings_.end()) return {};
  return it->second;
}

std::vector<Offset> HashIndexStructure::probe(std::string_view value, const Coverage& clip) const {
  std::vector<Offset> out;
  const auto list = postings(value);
  for (const auto& r : clip.intervals()) {
    auto b = std::lower_bound(list.begin(), list.end(), r.lo);
    auto e = std::lower_bound(b, list.end(), r.hi);
    out.insert(out.end(), b, e);
  }
  return out;
}

std::size_t HashIndexStructure::count_in(std::string_view value, const OffsetRange& r) const {
  const auto list = postings(value);
  auto b = std::lower_bound(list.begin(), list.end(), r.lo);
  auto e = std::lower_bound(b, list.end(), r.hi);
  return static_cast<std::size_t>(e - b);
}

nlohmann::json HashIndexStructure::dump(const OffsetRange& clip) const {
  std::map<std::string, std::vector<Offset>> sorted;
  for (const auto& [k, list] : postings_) {
    auto b = std::lower_bound(list.begin(), list.end(), clip.lo);
    auto e = std::lower_bound(b, list.end(), clip.hi);
    if (b != e) sorted.emplace(k, std::vector<Offset>(b, e));
  }
  nlohmann::json j = nlohmann::json::object();
  for (auto& [k, v] : sorted) j[k] = std::move(v);
  return j;
}

PreFilteredLog::PreFilteredLog(std::string id, StructureDescriptor d)
    : Structure(std::move(id), std::move(d)), width_(descriptor().stored_fields.size()) {}

void PreFilteredLog::add(Offset o, TimestampMs event_ts, std::span<const std::string* const> values) {
  check_writable();
  offsets_.push_back(o);
  event_ts_.push_back(event_ts);
  for (std::size_t f = 0; f < width_; ++f) {
    const std::string* v = f < values.size() ? values[f] : nullptr;
    values_.push_back(v != nullptr ? *v : std::string());
    present_.push_back(v != nullptr ? 1 : 0);
  }
}

std::size_t PreFilteredLog::lower_bound(Offset o) const {
  return static_cast<std::size_t>(std::lower_bound(offsets_.begin(), offsets_.end(), o) - offsets_.begin());
}

const std::string* PreFilteredLog::value_at(std::size_t i, std::size_t f) const {
  const std::size_t k = i * width_ + f;
  return present_[k] ? &values_[k] : nullptr;
}

int PreFilteredLog::column_of(std::string_view field) const {
  const auto& fs = descriptor().stored_fields;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i] == field) return static_cast<int>(i);
  }
  return -1;
}

nlohmann::json PreFilteredLog::dump(const OffsetRange& clip) const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = lower_bound(clip.lo); i < offsets_.size() && offsets_[i] < clip.hi; ++i) {
    nlohmann::json fields = nlohmann::json::object();
    for (std::size_t f = 0; f < width_; ++f) {
      if (const std::string* v = value_at(i, f)) fields[descriptor().stored_fields[f]] = *v;
    }
    rows.push_back({offsets_[i], event_ts_[i], std::move(fields)});
  }
  return rows;
}

MaterializedAggregate::MaterializedAggregate(std::string id, StructureDescriptor d)
    : Structure(std::move(id), std::move(d)), width_(std::max<std::uint32_t>(1, descriptor().bucket_records)) {}

void MaterializedAggregate::add(Offset o, TimestampMs event_ts, std::string_view key) {
  check_writable();
  Bucket& b = buckets_[o / width_];
  if (b.records == 0) {
    b.min_event_ts = b.max_event_ts = event_ts;
  } else {
    b.min_event_ts = std::min(b.min_event_ts, event_ts);
    b.max_event_ts = std::max(b.max_event_ts, event_ts);
  }
  ++b.records;
  auto it = b.counts.find(std::string(key));
  if (it == b.counts.end()) b.counts.emplace(std::string(key), 1);
  else ++it->second;
  ++records_;
}

const MaterializedAggregate::Bucket* MaterializedAggregate::bucket(std::uint64_t k) const {
  auto it = buckets_.find(k);
  return it == buckets_.end() ? nullptr : &it->second;
}

nlohmann::json MaterializedAggregate::dump(const OffsetRange& clip) const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, b] : buckets_) {
    if (bucket_range(k).intersect(clip).empty()) continue;
    std::map<std::string, std::uint64_t> sorted(b.counts.begin(), b.counts.end());
    out[std::to_string(k)] = {{"records", b.records},
                              {"min_event_ts", b.min_event_ts},
                              {"max_event_ts", b.max_event_ts},
                              {"counts", sorted}};
  }
  return out;
}

std::shared_ptr<Structure> make_structure(std::string id, const StructureDescriptor& d) {
  switch (d.kind) {
    case StructureKind::HashIndex: return std::make_shared<HashIndexStructure>(std::move(id), d);
    case StructureKind::PreFilteredLog: return std::make_shared<PreFilteredLog>(std::move(id), d);
    case StructureKind::MaterializedAggregate: return std::make_shared<MaterializedAggregate>(std::move(id), d);
  }
  throw Error(ErrorCode::Internal, "bad structure kind");
}

}  // namespace fluid
