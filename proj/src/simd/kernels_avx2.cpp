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

// Compiled with -mavx2 -mfma; only reached through the dispatch table after
// a CPU feature probe.

#include <immintrin.h>

#include <limits>

#include "kernels_internal.hpp"

namespace polybuild::simd::detail {

namespace {

inline __m256i tail_mask(int w) {
  const __m256i lanes = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  return _mm256_cmpgt_epi32(_mm256_set1_epi32(w), lanes);
}

// R rows of C times a 16-column strip (two ymm per row).
template <int R>
inline void block_16(int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc, bool acc) {
  __m256 c0[R], c1[R];
  for (int r = 0; r < R; ++r) {
    if (acc) {
      c0[r] = _mm256_loadu_ps(c + r * ldc);
      c1[r] = _mm256_loadu_ps(c + r * ldc + 8);
    } else {
      c0[r] = _mm256_setzero_ps();
      c1[r] = _mm256_setzero_ps();
    }
  }
  for (int p = 0; p < k; ++p) {
    const float* bp = b + static_cast<std::size_t>(p) * ldb;
    const __m256 b0 = _mm256_loadu_ps(bp);
    const __m256 b1 = _mm256_loadu_ps(bp + 8);
    for (int r = 0; r < R; ++r) {
      const __m256 av = _mm256_broadcast_ss(a + r * lda + p);
      c0[r] = _mm256_fmadd_ps(av, b0, c0[r]);
      c1[r] = _mm256_fmadd_ps(av, b1, c1[r]);
    }
  }
  for (int r = 0; r < R; ++r) {
    _mm256_storeu_ps(c + r * ldc, c0[r]);
    _mm256_storeu_ps(c + r * ldc + 8, c1[r]);
  }
}

// R rows times a strip of w <= 8 columns.
template <int R>
inline void block_8(int k, int w, const float* a, int lda, const float* b, int ldb, float* c, int ldc, bool acc) {
  const __m256i mask = tail_mask(w);
  __m256 c0[R];
  for (int r = 0; r < R; ++r) c0[r] = acc ? _mm256_maskload_ps(c + r * ldc, mask) : _mm256_setzero_ps();
  for (int p = 0; p < k; ++p) {
    const __m256 b0 = _mm256_maskload_ps(b + static_cast<std::size_t>(p) * ldb, mask);
    for (int r = 0; r < R; ++r) {
      c0[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(a + r * lda + p), b0, c0[r]);
    }
  }
  for (int r = 0; r < R; ++r) _mm256_maskstore_ps(c + r * ldc, mask, c0[r]);
}

template <int R>
void row_panel(int n, int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc, bool acc) {
  int j = 0;
  for (; j + 16 <= n; j += 16) block_16<R>(k, a, lda, b + j, ldb, c + j, ldc, acc);
  for (; j < n; j += 8) block_8<R>(k, n - j < 8 ? n - j : 8, a, lda, b + j, ldb, c + j, ldc, acc);
}

void gemm_f32(int m, int n, int k, const float* a, int lda, const float* b, int ldb, float* c, int ldc,
              bool accumulate) {
  if (k == 0) {
    if (!accumulate) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i) * ldc + j] = 0.0f;
      }
    }
    return;
  }
  int i = 0;
  for (; i + 6 <= m; i += 6) {
    row_panel<6>(n, k, a + static_cast<std::size_t>(i) * lda, lda, b, ldb, c + static_cast<std::size_t>(i) * ldc,
                 ldc, accumulate);
  }
  const float* ai = a + static_cast<std::size_t>(i) * lda;
  float* ci = c + static_cast<std::size_t>(i) * ldc;
  switch (m - i) {
    case 5:
      row_panel<5>(n, k, ai, lda, b, ldb, ci, ldc, accumulate);
      break;
    case 4:
      row_panel<4>(n, k, ai, lda, b, ldb, ci, ldc, accumulate);
      break;
    case 3:
      row_panel<3>(n, k, ai, lda, b, ldb, ci, ldc, accumulate);
      break;
    case 2:
      row_panel<2>(n, k, ai, lda, b, ldb, ci, ldc, accumulate);
      break;
    case 1:
      row_panel<1>(n, k, ai, lda, b, ldb, ci, ldc, accumulate);
      break;
    default:
      break;
  }
}

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
  return _mm_cvtss_f32(s);
}

float dot_f32(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float s = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_f32(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Separate mul/add (no FMA) keeps every distance bit-identical to the scalar
// reference.
double min_sq_dist(const double* xs, const double* ys, const double* zs, std::size_t n, double qx, double qy,
                   double qz, std::size_t* argmin) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d best_idx = _mm256_setzero_pd();
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
    const __m256d d =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
    const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, d, lt);
    best_idx = _mm256_blendv_pd(best_idx, idx, lt);
    idx = _mm256_add_pd(idx, four);
  }

  alignas(32) double lane_d[4];
  alignas(32) double lane_i[4];
  _mm256_store_pd(lane_d, best);
  _mm256_store_pd(lane_i, best_idx);
  double out = std::numeric_limits<double>::infinity();
  std::size_t out_i = 0;
  bool have = false;
  if (i > 0) {
    for (int l = 0; l < 4; ++l) {
      const auto li = static_cast<std::size_t>(lane_i[l]);
      if (!have || lane_d[l] < out || (lane_d[l] == out && li < out_i)) {
        out = lane_d[l];
        out_i = li;
        have = true;
      }
    }
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    const double d = (dx * dx + dy * dy) + dz * dz;
    if (!have || d < out) {
      out = d;
      out_i = i;
      have = true;
    }
  }
  if (argmin) *argmin = out_i;
  return out;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::kAvx2, &gemm_f32, &dot_f32, &axpy_f32, &min_sq_dist};
  return table;
}

}  // namespace polybuild::simd::detail
