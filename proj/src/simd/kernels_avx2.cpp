// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2. Only intrinsics and libc calls in here: no inline
// library templates, so nothing AVX2-encoded can leak into shared COMDATs.
#include "fluid/simd/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <cstring>

namespace fluid::simd {
namespace {

inline std::size_t scalar_find(const char* hay, std::size_t n, const char* needle, std::size_t m) {
  for (std::size_t i = 0; i + m <= n; ++i) {
    if (hay[i] == needle[0] && std::memcmp(hay + i, needle, m) == 0) return i;
  }
  return npos;
}

std::size_t find_avx2(const char* hay, std::size_t n, const char* needle, std::size_t m) {
  if (m == 0) return 0;
  if (m > n) return npos;
  const __m256i first = _mm256_set1_epi8(needle[0]);
  const __m256i last = _mm256_set1_epi8(needle[m - 1]);
  std::size_t i = 0;
  for (; i + m - 1 + 32 <= n; i += 32) {
    const __m256i bf = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hay + i));
    const __m256i bl = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hay + i + m - 1));
    auto mask = static_cast<std::uint32_t>(
        _mm256_movemask_epi8(_mm256_and_si256(_mm256_cmpeq_epi8(first, bf), _mm256_cmpeq_epi8(last, bl))));
    while (mask != 0) {
      const unsigned bit = static_cast<unsigned>(__builtin_ctz(mask));
      const std::size_t pos = i + bit;
      if (m <= 2 || std::memcmp(hay + pos + 1, needle + 1, m - 2) == 0) return pos;
      mask &= mask - 1;
    }
  }
  const std::size_t tail = scalar_find(hay + i, n - i, needle, m);
  return tail == npos ? npos : i + tail;
}

std::size_t rfind_avx2(const char* hay, std::size_t n, const char* needle, std::size_t m) {
  if (m == 0) return n;
  if (m > n) return npos;
  const __m256i first = _mm256_set1_epi8(needle[0]);
  const __m256i last = _mm256_set1_epi8(needle[m - 1]);
  // Candidate starts are [0, n - m]; blocks of 32 starts walked from the end.
  std::size_t starts = n - m + 1;
  while (starts >= 32) {
    const std::size_t i = starts - 32;
    const __m256i bf = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hay + i));
    const __m256i bl = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hay + i + m - 1));
    auto mask = static_cast<std::uint32_t>(
        _mm256_movemask_epi8(_mm256_and_si256(_mm256_cmpeq_epi8(first, bf), _mm256_cmpeq_epi8(last, bl))));
    while (mask != 0) {
      const unsigned bit = 31u - static_cast<unsigned>(__builtin_clz(mask));
      const std::size_t pos = i + bit;
      if (m <= 2 || std::memcmp(hay + pos + 1, needle + 1, m - 2) == 0) return pos;
      mask &= ~(1u << bit);
    }
    starts = i;
  }
  for (std::size_t i = starts; i-- > 0;) {
    if (hay[i] == needle[0] && std::memcmp(hay + i, needle, m) == 0) return i;
  }
  return npos;
}

std::size_t find_any_avx2(const char* p, std::size_t n, const char* set, std::size_t set_len) {
  __m256i needles[8];
  for (std::size_t j = 0; j < set_len; ++j) needles[j] = _mm256_set1_epi8(set[j]);
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i block = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i));
    __m256i hit = _mm256_cmpeq_epi8(block, needles[0]);
    for (std::size_t j = 1; j < set_len; ++j) hit = _mm256_or_si256(hit, _mm256_cmpeq_epi8(block, needles[j]));
    const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(hit));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; i < n; ++i) {
    for (std::size_t j = 0; j < set_len; ++j) {
      if (p[i] == set[j]) return i;
    }
  }
  return npos;
}

std::size_t select_range_avx2(const std::int64_t* ts, std::size_t n, std::int64_t lo, std::int64_t hi,
                              std::uint32_t* out) {
  const __m256i vlo = _mm256_set1_epi64x(lo);
  const __m256i vhi = _mm256_set1_epi64x(hi);
  std::size_t k = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ts + i));
    // lo <= t  <=>  !(lo > t);  t < hi  <=>  hi > t
    const __m256i in = _mm256_andnot_si256(_mm256_cmpgt_epi64(vlo, t), _mm256_cmpgt_epi64(vhi, t));
    auto mask = static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(in)));
    while (mask != 0) {
      out[k++] = static_cast<std::uint32_t>(i + static_cast<std::size_t>(__builtin_ctz(mask)));
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i) {
    if (ts[i] >= lo && ts[i] < hi) out[k++] = static_cast<std::uint32_t>(i);
  }
  return k;
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{Isa::Avx2, find_avx2, rfind_avx2, find_any_avx2, select_range_avx2};
  return &k;
}

}  // namespace fluid::simd

#else

namespace fluid::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace fluid::simd

#endif
