// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "fluid/simd/kernels.hpp"

namespace fluid::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels* pick_default() {
  const char* env = std::getenv("FLUID_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
  if (const Kernels* k = avx2_kernels(); k != nullptr && cpu_has_avx2()) return k;
  return &scalar_kernels();
}

std::atomic<const Kernels*>& slot() {
  static std::atomic<const Kernels*> s{pick_default()};
  return s;
}

}  // namespace

bool avx2_available() { return avx2_kernels() != nullptr && cpu_has_avx2(); }

const Kernels& active() { return *slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  const Kernels* k = &scalar_kernels();
  if (isa == Isa::Avx2 && avx2_kernels() != nullptr && cpu_has_avx2()) k = avx2_kernels();
  slot().store(k, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace fluid::simd
