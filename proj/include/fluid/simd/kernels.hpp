// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace fluid::simd {

enum class Isa { Scalar, Avx2 };

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Kernel table. Every entry has a scalar reference implementation; wider
// variants must produce bit-identical results.
struct Kernels {
  Isa isa;
  // First / last position of `needle` inside `hay`, npos when absent.
  std::size_t (*find)(const char* hay, std::size_t n, const char* needle, std::size_t m);
  std::size_t (*rfind)(const char* hay, std::size_t n, const char* needle, std::size_t m);
  // First position of any byte in `set` (1..8 bytes), npos when absent.
  std::size_t (*find_any)(const char* p, std::size_t n, const char* set, std::size_t set_len);
  // Writes indices i (ascending) with lo <= ts[i] < hi into out; returns count.
  std::size_t (*select_range)(const std::int64_t* ts, std::size_t n, std::int64_t lo,
                              std::int64_t hi, std::uint32_t* out);
};

const Kernels& scalar_kernels();
// Null when the build lacks the AVX2 translation unit. Check
// avx2_available() before calling through it.
const Kernels* avx2_kernels();
bool avx2_available();

// Kernels selected for this process. Defaults to the widest ISA the CPU
// supports; FLUID_SIMD=scalar in the environment forces the reference path.
const Kernels& active();
void force_isa(Isa isa);
const char* isa_name(Isa isa);

inline std::size_t find(std::string_view hay, std::string_view needle) {
  return active().find(hay.data(), hay.size(), needle.data(), needle.size());
}
inline std::size_t rfind(std::string_view hay, std::string_view needle) {
  return active().rfind(hay.data(), hay.size(), needle.data(), needle.size());
}
inline std::size_t find_any(std::string_view s, std::string_view set) {
  return active().find_any(s.data(), s.size(), set.data(), set.size());
}
inline std::size_t select_range(std::span<const std::int64_t> ts, std::int64_t lo, std::int64_t hi,
                                std::uint32_t* out) {
  return active().select_range(ts.data(), ts.size(), lo, hi, out);
}

}  // namespace fluid::simd
