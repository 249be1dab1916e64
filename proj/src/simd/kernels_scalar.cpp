// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/simd/kernels.hpp"

#include <cstring>

namespace fluid::simd {
namespace {

std::size_t find_scalar(const char* hay, std::size_t n, const char* needle, std::size_t m) {
  if (m == 0) return 0;
  if (m > n) return npos;
  const char first = needle[0];
  for (std::size_t i = 0; i + m <= n; ++i) {
    if (hay[i] == first && std::memcmp(hay + i, needle, m) == 0) return i;
  }
  return npos;
}

std::size_t rfind_scalar(const char* hay, std::size_t n, const char* needle, std::size_t m) {
  if (m == 0) return n;
  if (m > n) return npos;
  for (std::size_t i = n - m + 1; i-- > 0;) {
    if (hay[i] == needle[0] && std::memcmp(hay + i, needle, m) == 0) return i;
  }
  return npos;
}

std::size_t find_any_scalar(const char* p, std::size_t n, const char* set, std::size_t set_len) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < set_len; ++j) {
      if (p[i] == set[j]) return i;
    }
  }
  return npos;
}

std::size_t select_range_scalar(const std::int64_t* ts, std::size_t n, std::int64_t lo,
                                std::int64_t hi, std::uint32_t* out) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ts[i] >= lo && ts[i] < hi) out[k++] = static_cast<std::uint32_t>(i);
  }
  return k;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::Scalar, find_scalar, rfind_scalar, find_any_scalar,
                         select_range_scalar};
  return k;
}

}  // namespace fluid::simd
