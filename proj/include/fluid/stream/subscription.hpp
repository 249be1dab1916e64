// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "fluid/stream/raw_log.hpp"

namespace fluid {

// Pull-based delivery handle. The consumer owns its cursor into the raw log,
// so a slow consumer only lags; the ingest path never waits on it.
class Subscription {
 public:
  Subscription(const RawLog& log, std::string consumer, Offset from);

  const std::string& consumer() const { return consumer_; }
  Offset start_offset() const { return start_; }
  Offset position() const { return next_.load(std::memory_order_acquire); }
  Offset lag() const;

  // Delivers the next run of at most `max_batch` records, waiting up to `wait`
  // when none are available. Returns 0 once cancelled.
  std::size_t poll(std::vector<RawEvent>& out, std::size_t max_batch,
                   std::chrono::milliseconds wait = std::chrono::milliseconds(0));

  // Stops delivery. Records at or beyond final_offset() are never delivered.
  void cancel();
  bool cancelled() const { return cancelled_.load(std::memory_order_acquire); }
  std::optional<Offset> final_offset() const;

 private:
  const RawLog& log_;
  std::string consumer_;
  Offset start_;
  std::atomic<Offset> next_;
  std::atomic<bool> cancelled_{false};
  std::atomic<Offset> final_{0};
};

}  // namespace fluid
