// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fluid {

struct KnapsackItem {
  double cost = 0;   // > 0
  double value = 0;  // >= 0
};

struct KnapsackResult {
  std::vector<std::size_t> chosen;  // ascending item indices
  double cost = 0;
  double value = 0;
};

// Greedy by value/cost ratio, then the better of that bundle and the single
// most valuable item that fits. At least half the optimum.
KnapsackResult select_greedy(std::span<const KnapsackItem> items, double budget);

// Exact optimum via a Pareto frontier of (cost, value) states; exact for real
// costs. Exponential in the worst case, meant for n <= 20. n must be <= 64.
KnapsackResult select_exact(std::span<const KnapsackItem> items, double budget);

// Enumerates all 2^n subsets; n <= 24.
KnapsackResult select_brute_force(std::span<const KnapsackItem> items, double budget);

}  // namespace fluid
