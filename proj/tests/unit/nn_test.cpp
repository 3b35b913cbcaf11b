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
#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "polybuild/gradcheck.hpp"
#include "polybuild/mesh_io.hpp"
#include "polybuild/nn/autograd.hpp"
#include "polybuild/nn/checkpoint.hpp"
#include "polybuild/nn/functional.hpp"
#include "polybuild/nn/layers.hpp"

namespace polybuild::nn {
namespace {

namespace fs = std::filesystem;

template <typename T>
Matrix<T> random_matrix(Rng& rng, int r, int c, double scale = 1.0) {
  Matrix<T> m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(scale * standard_normal(rng));
  return m;
}

TEST(Tensor, GemmTransposeVariantsAgree) {
  Rng rng(1);
  const Matrix<double> a = random_matrix<double>(rng, 4, 6), b = random_matrix<double>(rng, 6, 5);
  const Matrix<double> ref = matmul(a, b);
  Matrix<double> c;
  gemm(true, false, transpose(a), b, c, false);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], ref.data()[i], 1e-12);
  gemm(false, true, a, transpose(b), c, false);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], ref.data()[i], 1e-12);
  gemm(true, true, transpose(a), transpose(b), c, true);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.data()[i], 2 * ref.data()[i], 1e-12);
  EXPECT_THROW(gemm(false, false, a, a, c, false), ShapeError);
}

TEST(CrossEntropy, ClosedForms) {
  Tape<double> t;
  const int uniform = t.constant(Matrix<double>(1, 257, 0.0));
  EXPECT_NEAR(t.value(cross_entropy(t, uniform, {42}))(0, 0), std::log(257.0), 1e-12);
  const int two = t.constant(Matrix<double>(1, 2, 0.0));
  EXPECT_NEAR(t.value(cross_entropy(t, two, {0}))(0, 0), std::log(2.0), 1e-12);
  Matrix<double> peaked(1, 5, 0.0);
  peaked(0, 3) = 60.0;
  const int p = t.constant(peaked);
  EXPECT_LT(t.value(cross_entropy(t, p, {3}))(0, 0), 1e-20);
}

TEST(GradCheck, LinearLayerOnly) {
  const GradCheckResult r = linear_gradient_check(200, 1e-4, 1);
  EXPECT_LT(r.max_rel_error, 1e-7) << r.worst;
}

TEST(GradCheck, ZeroWeightBias) {
  Rng rng(2);
  ParamStore<double> store;
  LinearLayer<double> l = LinearLayer<double>::create(store, "lin", 3, 2, rng, true, 0.0);
  const Matrix<double> x = random_matrix<double>(rng, 4, 3);
  const GradCheckResult r = gradient_check(
      store,
      [&](Tape<double>& t) {
        const int y = l.forward(t, t.constant(x));
        return cross_entropy(t, y, {0, 1, 1, 0});
      },
      8, 1e-4, 3);
  EXPECT_LT(r.max_rel_error, 1e-7) << r.worst;
}

// Checks one op's backward pass by finite differences through a fixed random
// projection and cross-entropy.
void check_op(const std::function<int(Tape<double>&, const std::vector<int>&)>& op,
              const std::vector<std::pair<int, int>>& shapes, int out_cols, double tol = 1e-6) {
  Rng rng(7);
  ParamStore<double> store;
  std::vector<Parameter<double>*> inputs;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    inputs.push_back(&store.add("in" + std::to_string(i), shapes[i].first, shapes[i].second, Init::kNormal, 1.0, rng));
  }
  const Matrix<double> proj = random_matrix<double>(rng, out_cols, 3);
  const GradCheckResult r = gradient_check(
      store,
      [&](Tape<double>& t) {
        std::vector<int> ids;
        for (Parameter<double>* p : inputs) ids.push_back(t.param(*p));
        const int y = matmul(t, op(t, ids), t.constant(proj));
        std::vector<int> targets(t.value(y).rows());
        for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = static_cast<int>(i % 3);
        return cross_entropy(t, y, targets);
      },
      60, 1e-5, 5);
  EXPECT_LT(r.max_rel_error, tol) << r.worst;
}

TEST(GradCheck, Ops) {
  check_op([](Tape<double>& t, const std::vector<int>& x) { return matmul_nt(t, x[0], x[1]); }, {{4, 3}, {5, 3}}, 5);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return linear(t, x[0], x[1], x[2]); },
           {{4, 3}, {3, 6}, {1, 6}}, 6);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return add_row(t, scale(t, x[0], 0.7), x[1]); },
           {{4, 3}, {1, 3}}, 3);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return gelu(t, x[0]); }, {{5, 4}}, 4);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return layer_norm(t, x[0], x[1], x[2]); },
           {{5, 4}, {1, 4}, {1, 4}}, 4);
  for (bool causal : {false, true}) {
    check_op([causal](Tape<double>& t, const std::vector<int>& x) { return attention(t, x[0], x[1], x[2], 2, causal); },
             {{5, 4}, {5, 4}, {5, 4}}, 4);
  }
  check_op([](Tape<double>& t, const std::vector<int>& x) { return attention(t, x[0], x[1], x[2], 2, false); },
           {{3, 4}, {6, 4}, {6, 4}}, 4);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return gather_rows(t, x[0], {2, 0, 2, 1}); }, {{3, 4}},
           4);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return concat_rows(t, x[0], x[1]); }, {{2, 4}, {3, 4}}, 4);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return mean_pool(t, x[0], {0, 1, 0, 1, 1}, 2); },
           {{5, 3}}, 3);
  check_op([](Tape<double>& t, const std::vector<int>& x) { return im2col(t, x[0], {0, -1, 2, 1, 0, -1, 2, 2, 1}, 3); },
           {{3, 2}}, 6);
}

TEST(Dropout, InactiveOutsideTrainingAndScaledInside) {
  Tape<double> t;
  const int x = t.constant(Matrix<double>(50, 40, 1.0));
  EXPECT_EQ(t.value(dropout(t, x)).values(), t.value(x).values());
  Rng rng(1);
  t.training = true;
  t.dropout = 0.5;
  t.rng = &rng;
  const Matrix<double>& y = t.value(dropout(t, x));
  double sum = 0;
  for (double v : y.values()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    sum += v;
  }
  EXPECT_NEAR(sum / y.size(), 1.0, 0.1);
}

struct StackFixture {
  Rng rng{3};
  ParamStore<float> store;
  TransformerStack<float> stack;
  StackFixture(bool causal, bool cross) {
    stack = TransformerStack<float>::create(store, "stack", {16, 2, 32, 2}, causal, cross, rng);
  }
  Matrix<float> forward(const Matrix<float>& x, const Matrix<float>* ctx) const {
    Tape<float> t;
    const int c = ctx ? t.constant(*ctx) : -1;
    return t.value(stack.forward(t, t.constant(x), c));
  }
};

TEST(Transformer, CausalityProbe) {
  StackFixture f(true, true);
  Rng rng(5);
  const Matrix<float> x = random_matrix<float>(rng, 8, 16), ctx = random_matrix<float>(rng, 5, 16);
  const Matrix<float> base = f.forward(x, &ctx);
  for (int k = 0; k < 8; ++k) {
    // A non-uniform change; a constant shift would vanish under layer norm.
    Matrix<float> xp = x;
    for (int c = 0; c < 16; ++c) xp(k, c) += 0.1f * static_cast<float>(c);
    const Matrix<float> out = f.forward(xp, &ctx);
    for (int r = 0; r < 8; ++r) {
      bool same = true;
      for (int c = 0; c < 16; ++c) same = same && out(r, c) == base(r, c);
      EXPECT_EQ(same, r < k) << "perturbed " << k << " row " << r;
    }
  }
}

TEST(Transformer, CrossAttentionIsActive) {
  StackFixture f(true, true);
  Rng rng(6);
  const Matrix<float> x = random_matrix<float>(rng, 3, 16), ctx = random_matrix<float>(rng, 4, 16);
  const Matrix<float> a = f.forward(x, &ctx), b = f.forward(x, nullptr);
  EXPECT_NE(a.values(), b.values());
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a.cols(), 16);
}

TEST(Transformer, IncrementalStepsMatchFullPass) {
  StackFixture f(true, true);
  Rng rng(7);
  const Matrix<float> x = random_matrix<float>(rng, 6, 16), ctx = random_matrix<float>(rng, 4, 16);
  const Matrix<float> full = f.forward(x, &ctx);
  StackCache<float> cache = f.stack.start(&ctx);
  for (int r = 0; r < 6; ++r) {
    Matrix<float> row(1, 16);
    for (int c = 0; c < 16; ++c) row(0, c) = x(r, c);
    const Matrix<float> out = f.stack.step(row, cache);
    for (int c = 0; c < 16; ++c) EXPECT_NEAR(out(0, c), full(r, c), 1e-4) << r << "," << c;
  }
}

TEST(Checkpoint, RoundTripAndErrors) {
  Rng rng(8);
  ParamStore<float> a;
  a.add("w", 3, 4, Init::kNormal, 1.0, rng);
  a.add("b", 1, 4, Init::kNormal, 1.0, rng);
  const fs::path dir = fs::temp_directory_path() / "polybuild_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  save_checkpoint(path, {{"k", 1}}, a);
  EXPECT_EQ(read_checkpoint_config(path)["k"], 1);

  ParamStore<float> b;
  b.add("w", 3, 4, Init::kZeros, 0.0, rng);
  b.add("b", 1, 4, Init::kZeros, 0.0, rng);
  load_checkpoint(path, b);
  EXPECT_EQ(b.at("w").value.values(), a.at("w").value.values());
  EXPECT_EQ(b.at("b").value.values(), a.at("b").value.values());

  ParamStore<float> wrong_shape;
  wrong_shape.add("w", 4, 3, Init::kZeros, 0.0, rng);
  wrong_shape.add("b", 1, 4, Init::kZeros, 0.0, rng);
  EXPECT_THROW(load_checkpoint(path, wrong_shape), CheckpointError);
  ParamStore<float> missing;
  missing.add("w", 3, 4, Init::kZeros, 0.0, rng);
  EXPECT_THROW(load_checkpoint(path, missing), CheckpointError);

  std::string bytes = read_file(path);
  write_file_atomic(dir / "trunc.ckpt", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint((dir / "trunc.ckpt").string(), b), CheckpointError);
  bytes[0] = 'X';
  write_file_atomic(dir / "magic.ckpt", bytes);
  EXPECT_THROW(load_checkpoint((dir / "magic.ckpt").string(), b), CheckpointError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace polybuild::nn
