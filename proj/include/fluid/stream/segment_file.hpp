// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fluid/stream/raw_log.hpp"

namespace fluid {

// On-disk layout of one segment, little-endian:
//   record*  : u32 payload_len | i64 ingest_ts | i64 event_ts | payload bytes
//   footer   : "FLSEGEND" | u64 lo | u64 count | i64 min_event_ts | i64 max_event_ts
// Sealed files are named segment-<lo>-<hi>.log; the tail being written is
// segment-<lo>-active.log and has no footer yet.
inline constexpr char kSegmentFooterMagic[8] = {'F', 'L', 'S', 'E', 'G', 'E', 'N', 'D'};
inline constexpr std::size_t kSegmentFooterSize = 8 + 8 + 8 + 8 + 8;
inline constexpr std::size_t kRecordHeaderSize = 4 + 8 + 8;

std::string sealed_segment_name(Offset lo, Offset hi);
std::string active_segment_name(Offset lo);

class SegmentFile {
 public:
  SegmentFile(std::filesystem::path dir, Offset lo);
  ~SegmentFile();
  SegmentFile(const SegmentFile&) = delete;
  SegmentFile& operator=(const SegmentFile&) = delete;

  void append(TimestampMs ingest_ts, TimestampMs event_ts, std::string_view payload);
  // Writes the footer, closes and renames to the sealed name. Returns the name.
  std::string seal(std::uint64_t count, TimestampMs min_ts, TimestampMs max_ts);
  void flush();

 private:
  std::filesystem::path dir_;
  Offset lo_;
  std::FILE* fp_ = nullptr;
};

struct StoredRecord {
  TimestampMs ingest_ts;
  TimestampMs event_ts;
  std::string payload;
};

struct SegmentFileContents {
  Offset lo = 0;
  bool has_footer = false;
  TimestampMs min_event_ts = 0;
  TimestampMs max_event_ts = 0;
  std::vector<StoredRecord> records;
};

// Reads a segment file. A truncated trailing record (crash mid-append) is
// dropped; a footer whose count disagrees with the records throws Error(Io).
SegmentFileContents read_segment_file(const std::filesystem::path& path);

}  // namespace fluid
