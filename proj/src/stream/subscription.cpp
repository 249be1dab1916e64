// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/stream/subscription.hpp"

namespace fluid {

Subscription::Subscription(const RawLog& log, std::string consumer, Offset from)
    : log_(log), consumer_(std::move(consumer)), start_(from), next_(from) {}

Offset Subscription::lag() const {
  const Offset hi = log_.hi_watermark();
  const Offset pos = position();
  return hi > pos ? hi - pos : 0;
}

std::size_t Subscription::poll(std::vector<RawEvent>& out, std::size_t max_batch, std::chrono::milliseconds wait) {
  out.clear();
  if (cancelled()) return 0;
  const Offset pos = next_.load(std::memory_order_relaxed);
  if (log_.hi_watermark() <= pos && wait.count() > 0) log_.wait_for(pos, wait);
  if (cancelled()) return 0;
  const std::size_t n = log_.read(pos, max_batch, out);
  next_.store(pos + n, std::memory_order_release);
  return n;
}

void Subscription::cancel() {
  final_.store(next_.load(std::memory_order_acquire), std::memory_order_release);
  cancelled_.store(true, std::memory_order_release);
}

std::optional<Offset> Subscription::final_offset() const {
  if (!cancelled()) return std::nullopt;
  return final_.load(std::memory_order_acquire);
}

}  // namespace fluid
