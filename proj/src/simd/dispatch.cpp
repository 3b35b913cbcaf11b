// Copyright 2026 The polybuild Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace polybuild::simd {

namespace {

bool cpu_has_avx2() {
#if defined(POLYBUILD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* select_initial() {
  const char* env = std::getenv("POLYBUILD_SIMD");
  if (env && std::string_view(env) == "scalar") return &detail::scalar_table();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{select_initial()};
  return table;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_kernels() { return detail::scalar_table(); }

const KernelTable* avx2_kernels() {
#if defined(POLYBUILD_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  const KernelTable* t = isa == Isa::kAvx2 ? avx2_kernels() : &detail::scalar_table();
  active().store(t ? t : &detail::scalar_table(), std::memory_order_release);
}

}  // namespace polybuild::simd
