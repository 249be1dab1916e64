// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/manager/knapsack.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "fluid/types.hpp"

namespace fluid {

namespace {

// Costs are summed in different orders by different solvers; treat a total
// within this slack of the budget as fitting.
constexpr double kEps = 1e-9;

bool fits(double cost, double budget) { return cost <= budget + kEps * std::max(1.0, budget); }

KnapsackResult from_mask(std::span<const KnapsackItem> items, std::uint64_t mask) {
  KnapsackResult r;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!(mask >> i & 1)) continue;
    r.chosen.push_back(i);
    r.cost += items[i].cost;
    r.value += items[i].value;
  }
  return r;
}

}  // namespace

KnapsackResult select_greedy(std::span<const KnapsackItem> items, double budget) {
  KnapsackResult greedy;
  if (budget <= 0) return greedy;
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](std::size_t i) { return items[i].cost > 0 ? items[i].value / items[i].cost : 1e300; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });
  for (std::size_t i : order) {
    if (items[i].value <= 0 || !fits(greedy.cost + items[i].cost, budget)) continue;
    greedy.chosen.push_back(i);
    greedy.cost += items[i].cost;
    greedy.value += items[i].value;
  }
  std::sort(greedy.chosen.begin(), greedy.chosen.end());

  KnapsackResult single;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].value > single.value && fits(items[i].cost, budget)) single = {{i}, items[i].cost, items[i].value};
  }
  return single.value > greedy.value ? single : greedy;
}

KnapsackResult select_exact(std::span<const KnapsackItem> items, double budget) {
  if (items.size() > 64) throw Error(ErrorCode::InvalidArgument, "exact knapsack supports at most 64 items");
  if (budget <= 0) return {};
  struct State {
    double cost, value;
    std::uint64_t mask;
  };
  std::vector<State> front{{0, 0, 0}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].value <= 0) continue;
    std::vector<State> next = front;
    for (const State& s : front) {
      const double c = s.cost + items[i].cost;
      if (fits(c, budget)) next.push_back({c, s.value + items[i].value, s.mask | (std::uint64_t{1} << i)});
    }
    // Keep only states not dominated by a cheaper-or-equal state.
    std::sort(next.begin(), next.end(), [](const State& a, const State& b) {
      return a.cost != b.cost ? a.cost < b.cost : a.value > b.value;
    });
    front.clear();
    for (const State& s : next)
      if (front.empty() || s.value > front.back().value) front.push_back(s);
  }
  return from_mask(items, front.back().mask);
}

KnapsackResult select_brute_force(std::span<const KnapsackItem> items, double budget) {
  if (items.size() > 24) throw Error(ErrorCode::InvalidArgument, "brute force supports at most 24 items");
  KnapsackResult best;
  if (budget <= 0) return best;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << items.size()); ++m) {
    KnapsackResult r = from_mask(items, m);
    if (fits(r.cost, budget) && r.value > best.value) best = std::move(r);
  }
  return best;
}

}  // namespace fluid
