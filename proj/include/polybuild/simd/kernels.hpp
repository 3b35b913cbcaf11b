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

#pragma once

#include <cstddef>

namespace polybuild::simd {

enum class Isa { kScalar, kAvx2 };

const char* to_string(Isa isa);

/// Inner-loop kernels. Every entry has a scalar reference implementation;
/// the AVX2 table holds the vectorized variants. Results of
/// `min_sq_dist` are bit-identical across variants; float kernels agree to
/// rounding (the AVX2 ones use FMA).
struct KernelTable {
  Isa isa;

  /// C[m x n] = A[m x k] * B[k x n] (+ C when accumulate). Row-major with
  /// explicit leading dimensions.
  void (*gemm_f32)(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc,
                   bool accumulate);

  float (*dot_f32)(const float* a, const float* b, std::size_t n);

  /// y += alpha * x
  void (*axpy_f32)(float alpha, const float* x, float* y, std::size_t n);

  /// Minimum of (dx*dx + dy*dy) + dz*dz over a structure-of-arrays point
  /// block. Ties resolve to the lowest index. n must be > 0.
  double (*min_sq_dist)(const double* xs, const double* ys, const double* zs, std::size_t n, double qx, double qy,
                        double qz, std::size_t* argmin);
};

const KernelTable& scalar_kernels();

/// nullptr when the build lacks AVX2 support or the CPU does not report
/// AVX2 and FMA.
const KernelTable* avx2_kernels();

/// Active table. Chosen once: POLYBUILD_SIMD=scalar|avx2 overrides the CPU
/// probe.
const KernelTable& kernels();

/// Switches the active table (tests and benchmarks).
void set_active(Isa isa);

}  // namespace polybuild::simd
