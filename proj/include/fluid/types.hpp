// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fluid {

using Offset = std::uint64_t;
using TimestampMs = std::int64_t;

// Half-open interval of log offsets.
struct OffsetRange {
  Offset lo = 0;
  Offset hi = 0;

  bool empty() const { return hi <= lo; }
  Offset size() const { return empty() ? 0 : hi - lo; }
  bool contains(Offset o) const { return o >= lo && o < hi; }
  bool contains(const OffsetRange& r) const { return r.empty() || (r.lo >= lo && r.hi <= hi); }
  OffsetRange intersect(const OffsetRange& r) const {
    OffsetRange out{std::max(lo, r.lo), std::min(hi, r.hi)};
    if (out.hi < out.lo) out.hi = out.lo;
    return out;
  }
  friend bool operator==(const OffsetRange&, const OffsetRange&) = default;
};

// Half-open event-time interval in epoch milliseconds.
struct EventWindow {
  TimestampMs from = std::numeric_limits<TimestampMs>::min();
  TimestampMs to = std::numeric_limits<TimestampMs>::max();

  bool empty() const { return to <= from; }
  bool contains(TimestampMs t) const { return t >= from && t < to; }
  static EventWindow all() { return {}; }
  friend bool operator==(const EventWindow&, const EventWindow&) = default;
};

enum class ErrorCode {
  InvalidArgument,
  NotFound,
  AlreadyExists,
  FailedPrecondition,
  StorageFull,
  Io,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fluid
