// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/stream/raw_log.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fluid/json_probe.hpp"
#include "fluid/stream/segment_file.hpp"
#include "fluid/stream/subscription.hpp"

namespace fluid {

namespace fs = std::filesystem;

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::AlreadyExists: return "already_exists";
    case ErrorCode::FailedPrecondition: return "failed_precondition";
    case ErrorCode::StorageFull: return "storage_full";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

namespace {
constexpr std::size_t kChunkBytes = 256 * 1024;
}

Segment::Segment(Offset lo, std::uint32_t capacity, TimestampMs opened_ms)
    : lo_(lo),
      capacity_(capacity),
      opened_ms_(opened_ms),
      slots_(new Slot[capacity]),
      event_ts_(new TimestampMs[capacity]) {}

Segment::~Segment() = default;

char* Segment::allocate(std::size_t n) {
  if (n > kChunkBytes / 4) {
    chunks_.emplace_back(new char[n]);
    return chunks_.back().get();
  }
  if (bump_ == nullptr || chunk_used_ + n > kChunkBytes) {
    chunks_.emplace_back(new char[kChunkBytes]);
    bump_ = chunks_.back().get();
    chunk_used_ = 0;
  }
  char* out = bump_ + chunk_used_;
  chunk_used_ += n;
  return out;
}

void Segment::append(TimestampMs ingest_ts, TimestampMs event_ts, std::string_view payload) {
  const std::uint32_t i = count_.load(std::memory_order_relaxed);
  // Age counts from the first record, not from when the writer opened the slot.
  if (i == 0) opened_ms_ = ingest_ts;
  char* dst = allocate(payload.size());
  if (!payload.empty()) std::memcpy(dst, payload.data(), payload.size());
  slots_[i] = Slot{dst, static_cast<std::uint32_t>(payload.size()), ingest_ts};
  event_ts_[i] = event_ts;
  bytes_ += payload.size();
  if (event_ts < min_ts_.load(std::memory_order_relaxed)) min_ts_.store(event_ts, std::memory_order_release);
  if (event_ts > max_ts_.load(std::memory_order_relaxed)) max_ts_.store(event_ts, std::memory_order_release);
  count_.store(i + 1, std::memory_order_release);
}

SegmentInfo Segment::info() const {
  const std::uint32_t n = count();
  return SegmentInfo{{lo_, lo_ + n}, sealed(), n ? min_event_ts() : 0, n ? max_event_ts() : 0, location_};
}

LogSnapshot::LogSnapshot(std::vector<std::shared_ptr<const Segment>> segments, Offset hi)
    : segments_(std::move(segments)), hi_(hi) {}

std::uint32_t LogSnapshot::visible(std::size_t i) const {
  const Segment& s = *segments_[i];
  if (s.lo() >= hi_) return 0;
  return static_cast<std::uint32_t>(std::min<Offset>(s.count(), hi_ - s.lo()));
}

std::size_t LogSnapshot::segment_of(Offset o) const {
  if (o >= hi_) return segments_.size();
  auto it = std::upper_bound(segments_.begin(), segments_.end(), o,
                             [](Offset v, const std::shared_ptr<const Segment>& s) { return v < s->lo(); });
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

std::optional<RawEvent> LogSnapshot::at(Offset o) const {
  const std::size_t i = segment_of(o);
  if (i >= segments_.size()) return std::nullopt;
  return segments_[i]->at(static_cast<std::uint32_t>(o - segments_[i]->lo()));
}

OffsetRange LogSnapshot::window_extent(const EventWindow& w) const {
  OffsetRange out{0, 0};
  bool any = false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const std::uint32_t n = visible(i);
    if (n == 0) continue;
    const Segment& s = *segments_[i];
    if (s.max_event_ts() < w.from || s.min_event_ts() >= w.to) continue;
    if (!any) out.lo = s.lo();
    out.hi = s.lo() + n;
    any = true;
  }
  return any ? out : OffsetRange{0, 0};
}

std::vector<SegmentInfo> LogSnapshot::segment_infos() const {
  std::vector<SegmentInfo> out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    SegmentInfo info = segments_[i]->info();
    const std::uint32_t n = visible(i);
    if (info.range.size() > n) {
      info.range.hi = info.range.lo + n;
      info.sealed = false;
    }
    out.push_back(std::move(info));
  }
  return out;
}

RawLog::RawLog(LogOptions options) : options_(std::move(options)) {
  if (options_.segment_records == 0) throw Error(ErrorCode::InvalidArgument, "segment_records must be positive");
  if (!options_.log_dir.empty()) fs::create_directories(options_.log_dir);
  open_active(now());
}

RawLog::~RawLog() {
  close();
  if (active_file_) active_file_->flush();
}

TimestampMs RawLog::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void RawLog::open_active(TimestampMs now_ms) {
  const Offset lo = hi_.load(std::memory_order_relaxed);
  auto seg = std::make_shared<Segment>(lo, options_.segment_records, now_ms);
  if (!options_.log_dir.empty()) {
    active_file_ = std::make_unique<SegmentFile>(options_.log_dir, lo);
    seg->set_location((fs::path(options_.log_dir) / active_segment_name(lo)).string());
  } else {
    seg->set_location("memory:" + std::to_string(lo));
  }
  active_ = seg.get();
  std::lock_guard lk(segments_mu_);
  segments_.push_back(std::move(seg));
}

Offset RawLog::ingest(std::string_view payload) { return ingest(payload, now()); }

Offset RawLog::ingest(std::string_view payload, TimestampMs ingest_ts) {
  std::lock_guard lk(writer_mu_);
  if (options_.max_bytes != 0 && bytes_.load(std::memory_order_relaxed) + payload.size() > options_.max_bytes) {
    throw Error(ErrorCode::StorageFull, "raw log storage budget exhausted");
  }
  if (active_->count() > 0 && ingest_ts - active_->opened_ms() >= options_.segment_max_age_ms) {
    seal_locked();
    open_active(ingest_ts);
  }
  const TimestampMs event_ts = probe_timestamp_ms(payload, options_.timestamp_key).value_or(ingest_ts);
  const Offset off = hi_.load(std::memory_order_relaxed);
  if (active_file_) active_file_->append(ingest_ts, event_ts, payload);
  active_->append(ingest_ts, event_ts, payload);
  bytes_.fetch_add(payload.size(), std::memory_order_relaxed);
  if (event_ts > latest_ts_.load(std::memory_order_relaxed)) latest_ts_.store(event_ts, std::memory_order_relaxed);
  hi_.store(off + 1, std::memory_order_seq_cst);
  if (waiters_.load(std::memory_order_seq_cst) > 0) {
    { std::lock_guard wl(wait_mu_); }
    wait_cv_.notify_all();
  }
  if (active_->full()) {
    seal_locked();
    open_active(ingest_ts);
  }
  return off;
}

void RawLog::seal_locked() {
  Segment* s = active_;
  const std::uint32_t n = s->count();
  if (active_file_) {
    const std::string name = active_file_->seal(n, s->min_event_ts(), s->max_event_ts());
    active_file_.reset();
    s->set_location((fs::path(options_.log_dir) / name).string());
  }
  s->seal();
  if (!options_.log_dir.empty()) write_manifest();
}

std::optional<SegmentInfo> RawLog::seal_active_segment() {
  std::lock_guard lk(writer_mu_);
  if (active_->count() == 0) return std::nullopt;
  Segment* sealed = active_;
  seal_locked();
  open_active(now());
  return sealed->info();
}

void RawLog::write_manifest() {
  std::ostringstream out;
  {
    std::lock_guard lk(segments_mu_);
    for (const auto& s : segments_) {
      if (!s->sealed()) continue;
      const std::uint32_t n = s->count();
      out << sealed_segment_name(s->lo(), s->lo() + n) << ' ' << s->lo() << ' ' << s->lo() + n << ' '
          << s->min_event_ts() << ' ' << s->max_event_ts() << '\n';
    }
  }
  const fs::path dir(options_.log_dir);
  const fs::path tmp = dir / "log.manifest.tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << out.str();
    if (!f) throw Error(ErrorCode::Io, "manifest write failed");
  }
  fs::rename(tmp, dir / "log.manifest");
}

std::unique_ptr<RawLog> RawLog::open(LogOptions options) {
  if (options.log_dir.empty()) return std::make_unique<RawLog>(std::move(options));
  const fs::path dir(options.log_dir);
  fs::create_directories(dir);
  struct Entry {
    std::string name;
    Offset lo, hi;
  };
  std::vector<Entry> entries;
  if (std::ifstream mf(dir / "log.manifest"); mf) {
    Entry e;
    TimestampMs mn, mx;
    while (mf >> e.name >> e.lo >> e.hi >> mn >> mx) entries.push_back(e);
  }
  Offset tail_lo = entries.empty() ? 0 : entries.back().hi;
  std::vector<StoredRecord> tail;
  if (fs::exists(dir / active_segment_name(tail_lo))) {
    tail = read_segment_file(dir / active_segment_name(tail_lo)).records;
    fs::remove(dir / active_segment_name(tail_lo));
  }
  // Build the log without touching the directory, then attach the files.
  LogOptions mem = options;
  mem.log_dir.clear();
  auto log = std::make_unique<RawLog>(mem);
  log->segments_.clear();
  Offset expect = 0;
  for (const auto& e : entries) {
    if (e.lo != expect) throw Error(ErrorCode::Io, "manifest has a gap at offset " + std::to_string(expect));
    auto contents = read_segment_file(dir / e.name);
    if (!contents.has_footer || contents.lo != e.lo || contents.records.size() != e.hi - e.lo) {
      throw Error(ErrorCode::Io, "segment " + e.name + " disagrees with manifest");
    }
    const auto cap = static_cast<std::uint32_t>(std::max<std::size_t>(contents.records.size(), 1));
    auto seg = std::make_shared<Segment>(e.lo, cap, 0);
    for (const auto& r : contents.records) {
      seg->append(r.ingest_ts, r.event_ts, r.payload);
      if (r.event_ts > log->latest_ts_.load()) log->latest_ts_.store(r.event_ts);
      log->bytes_ += r.payload.size();
    }
    seg->seal();
    seg->set_location((dir / e.name).string());
    log->segments_.push_back(std::move(seg));
    expect = e.hi;
  }
  log->hi_.store(expect);
  log->options_ = options;
  log->open_active(log->now());
  for (const auto& r : tail) log->ingest(r.payload, r.ingest_ts);
  return log;
}

std::optional<TimestampMs> RawLog::latest_event_ts() const {
  if (hi_watermark() == 0) return std::nullopt;
  return latest_ts_.load(std::memory_order_relaxed);
}

std::size_t RawLog::segment_count() const {
  std::lock_guard lk(segments_mu_);
  return segments_.size();
}

LogSnapshot RawLog::snapshot() const {
  std::vector<std::shared_ptr<const Segment>> segs;
  const Offset hi = hi_watermark();
  {
    std::lock_guard lk(segments_mu_);
    segs.assign(segments_.begin(), segments_.end());
  }
  return LogSnapshot(std::move(segs), hi);
}

std::size_t RawLog::read(Offset from, std::size_t max, std::vector<RawEvent>& out) const {
  const Offset hi = hi_watermark();
  if (from >= hi || max == 0) return 0;
  const Offset end = std::min<Offset>(hi, from + max);
  std::vector<std::shared_ptr<const Segment>> segs;
  {
    std::lock_guard lk(segments_mu_);
    auto it = std::upper_bound(segments_.begin(), segments_.end(), from,
                               [](Offset v, const std::shared_ptr<Segment>& s) { return v < s->lo(); });
    for (--it; it != segments_.end() && (*it)->lo() < end; ++it) segs.push_back(*it);
  }
  std::size_t n = 0;
  for (const auto& s : segs) {
    const Offset b = std::max(from, s->lo());
    const Offset e = std::min<Offset>(end, s->lo() + s->count());
    for (Offset o = b; o < e; ++o, ++n) out.push_back(s->at(static_cast<std::uint32_t>(o - s->lo())));
  }
  return n;
}

bool RawLog::wait_for(Offset offset, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(wait_mu_);
  waiters_.fetch_add(1, std::memory_order_seq_cst);
  const bool ok = wait_cv_.wait_for(lk, timeout, [&] {
    return hi_.load(std::memory_order_seq_cst) > offset || closed_.load(std::memory_order_acquire);
  });
  waiters_.fetch_sub(1, std::memory_order_seq_cst);
  return ok && hi_.load() > offset;
}

void RawLog::close() {
  closed_.store(true, std::memory_order_release);
  { std::lock_guard wl(wait_mu_); }
  wait_cv_.notify_all();
}

std::unique_ptr<Subscription> RawLog::subscribe(std::string consumer, std::optional<Offset> from) {
  return std::make_unique<Subscription>(*this, std::move(consumer), from.value_or(hi_watermark()));
}

}  // namespace fluid
