// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fluid/simd/kernels.hpp"
#include "fluid/types.hpp"

namespace fluid {

struct RawEvent {
  Offset offset = 0;
  TimestampMs ingest_ts = 0;
  TimestampMs event_ts = 0;
  std::string_view payload;
};

// Footer-level description of a segment.
struct SegmentInfo {
  OffsetRange range;
  bool sealed = false;
  TimestampMs min_event_ts = 0;
  TimestampMs max_event_ts = 0;
  std::string location;
};

class SegmentFile;

// Fixed-capacity run of consecutive records. One writer appends and publishes
// the record count with release ordering; readers may access any record below
// the count they observed.
class Segment {
 public:
  Segment(Offset lo, std::uint32_t capacity, TimestampMs opened_ms);
  ~Segment();
  Segment(const Segment&) = delete;
  Segment& operator=(const Segment&) = delete;

  Offset lo() const { return lo_; }
  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t count() const { return count_.load(std::memory_order_acquire); }
  bool sealed() const { return sealed_.load(std::memory_order_acquire); }
  bool full() const { return count() == capacity_; }
  TimestampMs opened_ms() const { return opened_ms_; }
  TimestampMs min_event_ts() const { return min_ts_.load(std::memory_order_acquire); }
  TimestampMs max_event_ts() const { return max_ts_.load(std::memory_order_acquire); }
  std::size_t bytes() const { return bytes_; }
  const std::string& location() const { return location_; }

  RawEvent at(std::uint32_t index) const {
    const Slot& s = slots_[index];
    return RawEvent{lo_ + index, s.ingest_ts, event_ts_[index], std::string_view(s.data, s.len)};
  }
  std::span<const TimestampMs> event_ts_column(std::uint32_t n) const { return {event_ts_.get(), n}; }

  void append(TimestampMs ingest_ts, TimestampMs event_ts, std::string_view payload);
  void seal() { sealed_.store(true, std::memory_order_release); }
  void set_location(std::string loc) { location_ = std::move(loc); }

  SegmentInfo info() const;

 private:
  struct Slot {
    const char* data;
    std::uint32_t len;
    TimestampMs ingest_ts;
  };

  char* allocate(std::size_t n);

  Offset lo_;
  std::uint32_t capacity_;
  TimestampMs opened_ms_;
  std::unique_ptr<Slot[]> slots_;
  std::unique_ptr<TimestampMs[]> event_ts_;
  std::vector<std::unique_ptr<char[]>> chunks_;
  char* bump_ = nullptr;
  std::size_t chunk_used_ = 0;
  std::size_t bytes_ = 0;
  std::atomic<std::uint32_t> count_{0};
  std::atomic<TimestampMs> min_ts_{std::numeric_limits<TimestampMs>::max()};
  std::atomic<TimestampMs> max_ts_{std::numeric_limits<TimestampMs>::min()};
  std::atomic<bool> sealed_{false};
  std::string location_;
};

// Read-only view of the log pinned at a hi-watermark. Cheap to copy.
class LogSnapshot {
 public:
  LogSnapshot() = default;
  LogSnapshot(std::vector<std::shared_ptr<const Segment>> segments, Offset hi);

  Offset hi() const { return hi_; }
  std::size_t segment_count() const { return segments_.size(); }

  // Records visible in segment i under this snapshot.
  std::uint32_t visible(std::size_t i) const;
  const Segment& segment(std::size_t i) const { return *segments_[i]; }
  // Index of the segment holding `o`, or segment_count() when o >= hi().
  std::size_t segment_of(Offset o) const;

  std::optional<RawEvent> at(Offset o) const;

  // Offset extent that can hold events of `w`: from the first to the last
  // segment whose event-time bounds overlap the window. Empty when none do.
  OffsetRange window_extent(const EventWindow& w) const;

  // Visits every event in `range` (clipped to the snapshot) in offset order.
  template <class F>
  void scan(OffsetRange range, F&& f) const {
    range = range.intersect({0, hi_});
    if (range.empty()) return;
    for (std::size_t i = segment_of(range.lo); i < segments_.size(); ++i) {
      const Segment& s = *segments_[i];
      if (s.lo() >= range.hi) break;
      const std::uint32_t n = visible(i);
      const auto begin = static_cast<std::uint32_t>(std::max(range.lo, s.lo()) - s.lo());
      const auto end = static_cast<std::uint32_t>(std::min<Offset>(range.hi, s.lo() + n) - s.lo());
      for (std::uint32_t k = begin; k < end; ++k) f(s.at(k));
    }
  }

  // Visits events in `range` whose event_ts lies in `w`, in offset order.
  // Segments whose bounds miss the window are skipped, boundary segments are
  // filtered per record through the range-select kernel.
  template <class F>
  void scan_window(const EventWindow& w, OffsetRange range, F&& f) const {
    range = range.intersect({0, hi_});
    if (range.empty() || w.empty()) return;
    std::vector<std::uint32_t> idx;
    for (std::size_t i = segment_of(range.lo); i < segments_.size(); ++i) {
      const Segment& s = *segments_[i];
      if (s.lo() >= range.hi) break;
      const std::uint32_t n = visible(i);
      if (n == 0) continue;
      const TimestampMs mn = s.min_event_ts();
      const TimestampMs mx = s.max_event_ts();
      if (mx < w.from || mn >= w.to) continue;
      const auto begin = static_cast<std::uint32_t>(std::max(range.lo, s.lo()) - s.lo());
      const auto end = static_cast<std::uint32_t>(std::min<Offset>(range.hi, s.lo() + n) - s.lo());
      if (begin >= end) continue;
      if (mn >= w.from && mx < w.to) {
        for (std::uint32_t k = begin; k < end; ++k) f(s.at(k));
        continue;
      }
      idx.resize(end - begin);
      const std::size_t hits =
          simd::select_range(s.event_ts_column(n).subspan(begin, end - begin), w.from, w.to, idx.data());
      for (std::size_t h = 0; h < hits; ++h) f(s.at(begin + idx[h]));
    }
  }

  std::vector<SegmentInfo> segment_infos() const;

 private:
  std::vector<std::shared_ptr<const Segment>> segments_;
  Offset hi_ = 0;
};

struct LogOptions {
  std::uint32_t segment_records = 4096;
  TimestampMs segment_max_age_ms = 60'000;
  // Maximum event-time lateness the producer promises.
  TimestampMs disorder_bound_ms = 5'000;
  std::string timestamp_key = "created_at";
  // Empty: memory only. Otherwise segment files and a manifest live here.
  std::string log_dir;
  // Payload byte budget; 0 means unlimited.
  std::uint64_t max_bytes = 0;
  std::function<TimestampMs()> clock;
};

class Subscription;

class RawLog {
 public:
  explicit RawLog(LogOptions options = {});
  ~RawLog();
  RawLog(const RawLog&) = delete;
  RawLog& operator=(const RawLog&) = delete;

  // Reopens a persisted log: sealed segments from the manifest plus the
  // records of the unsealed tail file.
  static std::unique_ptr<RawLog> open(LogOptions options);

  // Appends one record; returns its offset. Throws Error(StorageFull) or
  // Error(Io) instead of dropping the record.
  Offset ingest(std::string_view payload);
  Offset ingest(std::string_view payload, TimestampMs ingest_ts);

  // Seals the active segment when it holds records. Returns its footer info.
  std::optional<SegmentInfo> seal_active_segment();

  Offset hi_watermark() const { return hi_.load(std::memory_order_acquire); }
  // Largest event_ts ingested so far, nullopt on an empty log.
  std::optional<TimestampMs> latest_event_ts() const;
  std::size_t segment_count() const;
  std::uint64_t bytes() const { return bytes_.load(std::memory_order_relaxed); }
  const LogOptions& options() const { return options_; }

  LogSnapshot snapshot() const;

  // Copies up to `max` events starting at `from` (bounded by the
  // hi-watermark) into `out`. Returns the number copied.
  std::size_t read(Offset from, std::size_t max, std::vector<RawEvent>& out) const;

  // Blocks until hi_watermark() > offset, the timeout expires or close() is called.
  bool wait_for(Offset offset, std::chrono::milliseconds timeout) const;
  void close();

  std::unique_ptr<Subscription> subscribe(std::string consumer, std::optional<Offset> from = std::nullopt);

 private:
  TimestampMs now() const;
  void open_active(TimestampMs now_ms);
  void seal_locked();
  void write_manifest();

  LogOptions options_;
  mutable std::mutex writer_mu_;
  mutable std::mutex segments_mu_;
  std::vector<std::shared_ptr<Segment>> segments_;
  Segment* active_ = nullptr;
  std::unique_ptr<SegmentFile> active_file_;
  std::atomic<Offset> hi_{0};
  std::atomic<std::uint64_t> bytes_{0};
  std::atomic<TimestampMs> latest_ts_{std::numeric_limits<TimestampMs>::min()};

  mutable std::mutex wait_mu_;
  mutable std::condition_variable wait_cv_;
  mutable std::atomic<int> waiters_{0};
  std::atomic<bool> closed_{false};
};

}  // namespace fluid
