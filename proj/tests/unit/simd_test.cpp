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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "polybuild/random.hpp"
#include "polybuild/simd/kernels.hpp"

namespace polybuild::simd {
namespace {

std::vector<float> random_floats(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(uniform(rng, -1, 1));
  return v;
}

const KernelTable* avx2_or_skip() { return avx2_kernels(); }

TEST(Dispatch, ActiveTableIsScalarOrAvx2) {
  const KernelTable& k = kernels();
  EXPECT_TRUE(k.isa == Isa::kScalar || k.isa == Isa::kAvx2);
  set_active(Isa::kScalar);
  EXPECT_EQ(kernels().isa, Isa::kScalar);
  set_active(avx2_kernels() ? Isa::kAvx2 : Isa::kScalar);
  EXPECT_EQ(&kernels(), avx2_kernels() ? avx2_kernels() : &scalar_kernels());
}

TEST(Gemm, ScalarMatchesNaiveProduct) {
  Rng rng(1);
  const int m = 7, n = 13, k = 5;
  const std::vector<float> a = random_floats(rng, m * k), b = random_floats(rng, k * n);
  std::vector<float> c(m * n, 0.0f);
  scalar_kernels().gemm_f32(m, n, k, a.data(), k, b.data(), n, c.data(), n, false);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double ref = 0;
      for (int p = 0; p < k; ++p) ref += static_cast<double>(a[i * k + p]) * b[p * n + j];
      EXPECT_NEAR(c[i * n + j], ref, 1e-5);
    }
  }
}

class KernelEquivalence : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(KernelEquivalence, Avx2GemmMatchesScalar) {
  const KernelTable* avx = avx2_or_skip();
  if (!avx) GTEST_SKIP() << "no AVX2 on this machine";
  const auto [m, n, k] = GetParam();
  Rng rng(m * 1000 + n * 10 + k);
  const std::vector<float> a = random_floats(rng, m * k), b = random_floats(rng, k * n);
  for (bool accumulate : {false, true}) {
    std::vector<float> c0 = random_floats(rng, m * n), c1 = c0;
    scalar_kernels().gemm_f32(m, n, k, a.data(), k, b.data(), n, c0.data(), n, accumulate);
    avx->gemm_f32(m, n, k, a.data(), k, b.data(), n, c1.data(), n, accumulate);
    for (int i = 0; i < m * n; ++i) EXPECT_NEAR(c0[i], c1[i], 1e-5f * (1 + std::sqrt(static_cast<float>(k))));
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, KernelEquivalence,
                         ::testing::Values(std::make_tuple(1, 1, 1), std::make_tuple(3, 5, 7),
                                           std::make_tuple(6, 16, 9), std::make_tuple(17, 33, 65),
                                           std::make_tuple(64, 257, 128), std::make_tuple(100, 3, 300)));

TEST(KernelEquivalence, DotAndAxpy) {
  const KernelTable* avx = avx2_or_skip();
  if (!avx) GTEST_SKIP() << "no AVX2 on this machine";
  Rng rng(3);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 32u, 1000u}) {
    const std::vector<float> a = random_floats(rng, n), b = random_floats(rng, n);
    EXPECT_NEAR(scalar_kernels().dot_f32(a.data(), b.data(), n), avx->dot_f32(a.data(), b.data(), n), 1e-4);
    std::vector<float> y0 = b, y1 = b;
    scalar_kernels().axpy_f32(0.37f, a.data(), y0.data(), n);
    avx->axpy_f32(0.37f, a.data(), y1.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y0[i], y1[i], 1e-6);
  }
}

TEST(KernelEquivalence, MinSquaredDistanceIsBitIdentical) {
  const KernelTable* avx = avx2_or_skip();
  if (!avx) GTEST_SKIP() << "no AVX2 on this machine";
  Rng rng(4);
  for (std::size_t n : {1u, 3u, 4u, 5u, 16u, 127u, 1000u}) {
    std::vector<double> xs(n), ys(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = uniform(rng, -3, 3);
      ys[i] = uniform(rng, -3, 3);
      zs[i] = uniform(rng, -3, 3);
    }
    // Duplicate a point so ties are exercised.
    if (n > 2) {
      xs[n - 1] = xs[1];
      ys[n - 1] = ys[1];
      zs[n - 1] = zs[1];
    }
    for (int q = 0; q < 50; ++q) {
      const double qx = uniform(rng, -3, 3), qy = uniform(rng, -3, 3), qz = uniform(rng, -3, 3);
      std::size_t i0 = 0, i1 = 0;
      const double d0 = scalar_kernels().min_sq_dist(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, &i0);
      const double d1 = avx->min_sq_dist(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, &i1);
      EXPECT_EQ(d0, d1);
      EXPECT_EQ(i0, i1);
    }
    std::size_t i0 = 0, i1 = 0;
    scalar_kernels().min_sq_dist(xs.data(), ys.data(), zs.data(), n, xs[1 % n], ys[1 % n], zs[1 % n], &i0);
    avx->min_sq_dist(xs.data(), ys.data(), zs.data(), n, xs[1 % n], ys[1 % n], zs[1 % n], &i1);
    EXPECT_EQ(i0, i1);
    EXPECT_EQ(i0, 1 % n);
  }
}

}  // namespace
}  // namespace polybuild::simd
