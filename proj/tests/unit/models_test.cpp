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
#include <set>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "polybuild/codec.hpp"
#include "polybuild/models/face_model.hpp"
#include "polybuild/models/point_encoder.hpp"
#include "polybuild/models/vertex_model.hpp"

namespace polybuild::models {
namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.width = 16;
  c.heads = 2;
  c.ff = 32;
  c.layers = 2;
  c.face_encoder_layers = 1;
  c.max_vertices = 40;
  c.max_faces = 30;
  c.max_face_size = 8;
  c.voxel_grid = 32;
  c.encoder_channels = {4, 4, 8};
  c.dropout = 0.0;
  return c;
}

nn::Matrix<float> random_context(Rng& rng, int rows, int width) {
  nn::Matrix<float> m(rows, width);
  for (float& v : m.values()) v = static_cast<float>(standard_normal(rng));
  return m;
}

struct VertexFixture {
  Rng rng{1};
  nn::ParamStore<float> store;
  VertexModel<float> model;
  VertexFixture() { model = VertexModel<float>::create(store, small_config(), rng); }
  nn::Matrix<float> logits(const nn::Matrix<float>& ctx, const std::vector<int>& tokens) const {
    nn::Tape<float> t;
    return t.value(model.logits(t, t.constant(ctx), tokens));
  }
};

bool rows_equal(const nn::Matrix<float>& a, const nn::Matrix<float>& b, int r) {
  for (int c = 0; c < a.cols(); ++c) {
    if (a(r, c) != b(r, c)) return false;
  }
  return true;
}

TEST(VertexModel, LogitShape) {
  VertexFixture f;
  Rng rng(2);
  const nn::Matrix<float> l = f.logits(random_context(rng, 5, 16), {3, 4, 5, 256});
  EXPECT_EQ(l.rows(), 4);
  EXPECT_EQ(l.cols(), kVertexVocab);
}

TEST(VertexModel, CausalityProbe) {
  VertexFixture f;
  Rng rng(3);
  const nn::Matrix<float> ctx = random_context(rng, 6, 16);
  const std::vector<int> tokens = {3, 4, 5, 3, 9, 200, 7, 7, 7};
  const nn::Matrix<float> base = f.logits(ctx, tokens);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    std::vector<int> changed = tokens;
    changed[k] = (changed[k] + 50) % 256;
    const nn::Matrix<float> out = f.logits(ctx, changed);
    // Row n predicts token n from tokens[0..n): rows up to k are unaffected.
    for (int r = 0; r < base.rows(); ++r) {
      EXPECT_EQ(rows_equal(base, out, r), r <= static_cast<int>(k)) << "changed " << k << " row " << r;
    }
  }
}

TEST(VertexModel, ContextChangesEveryRow) {
  VertexFixture f;
  Rng rng(4);
  const std::vector<int> tokens = {1, 2, 3, 256};
  const nn::Matrix<float> a = f.logits(random_context(rng, 5, 16), tokens);
  const nn::Matrix<float> b = f.logits(random_context(rng, 5, 16), tokens);
  for (int r = 0; r < a.rows(); ++r) EXPECT_FALSE(rows_equal(a, b, r)) << r;
}

TEST(VertexModel, PositionAndCoordinateEmbeddingsDifferentiate) {
  VertexFixture f;
  nn::Tape<float> t;
  const std::vector<int> tok = {10};
  const nn::Matrix<float> e0 = t.value(f.model.embed_tokens(t, tok, 0));
  const nn::Matrix<float> e1 = t.value(f.model.embed_tokens(t, tok, 1));
  const nn::Matrix<float> e3 = t.value(f.model.embed_tokens(t, tok, 3));
  EXPECT_NE(e0.values(), e1.values());
  EXPECT_NE(e0.values(), e3.values());
  const std::vector<int> too_long(3 * 40 + 3, 1);
  EXPECT_THROW(f.model.embed_tokens(t, too_long, 0), Error);
}

TEST(VertexModel, IncrementalDecoderMatchesFullPass) {
  VertexFixture f;
  Rng rng(5);
  const nn::Matrix<float> ctx = random_context(rng, 7, 16);
  const std::vector<int> tokens = {0, 3, 9, 1, 3, 2, 256};
  const nn::Matrix<float> full = f.logits(ctx, tokens);
  VertexDecoder dec(f.model, ctx);
  for (std::size_t n = 0; n < tokens.size(); ++n) {
    const std::vector<float>& l = dec.next_logits();
    ASSERT_EQ(l.size(), static_cast<std::size_t>(kVertexVocab));
    for (int c = 0; c < kVertexVocab; ++c) EXPECT_NEAR(l[c], full(static_cast<int>(n), c), 1e-4);
    dec.push(tokens[n]);
  }
  EXPECT_EQ(dec.length(), static_cast<int>(tokens.size()));
}

struct FaceFixture {
  Rng rng{6};
  nn::ParamStore<float> store;
  FaceModel<float> model;
  explicit FaceFixture(bool list_positions = true) {
    ModelConfig c = small_config();
    c.vertex_list_positions = list_positions;
    model = FaceModel<float>::create(store, c, rng);
  }
};

std::vector<IVec3> some_vertices() { return {{1, 2, 3}, {7, 2, 3}, {7, 9, 3}, {1, 9, 3}, {4, 5, 20}}; }

TEST(FaceModel, PointerDistributionCoversVerticesAndSpecials) {
  FaceFixture f;
  const std::vector<IVec3> v = some_vertices();
  const std::vector<int> tokens = {2, 3, 6, kFaceEnd, 3, 4, 6, kFaceEnd, kFaceStop};
  nn::Tape<float> t;
  const nn::Matrix<float> l = t.value(f.model.logits(t, f.model.encode_vertices(t, v), tokens));
  ASSERT_EQ(l.rows(), static_cast<int>(tokens.size()));
  ASSERT_EQ(l.cols(), static_cast<int>(v.size()) + 2);
  for (int r = 0; r < l.rows(); ++r) {
    double mx = -1e30, sum = 0;
    for (int c = 0; c < l.cols(); ++c) mx = std::max(mx, static_cast<double>(l(r, c)));
    for (int c = 0; c < l.cols(); ++c) sum += std::exp(l(r, c) - mx);
    double total = 0;
    for (int c = 0; c < l.cols(); ++c) total += std::exp(l(r, c) - mx) / sum;
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int c = 0; c < l.cols(); ++c) EXPECT_TRUE(std::isfinite(l(r, c)));
  }
}

TEST(FaceModel, IncrementalDecoderMatchesFullPass) {
  FaceFixture f;
  const std::vector<IVec3> v = some_vertices();
  const std::vector<int> tokens = {2, 3, 4, 5, kFaceEnd, 2, 3, 6, kFaceEnd, kFaceStop};
  nn::Tape<float> t;
  const nn::Matrix<float> full = t.value(f.model.logits(t, f.model.encode_vertices(t, v), tokens));
  FaceDecoder dec(f.model, v);
  for (std::size_t n = 0; n < tokens.size(); ++n) {
    const std::vector<float>& l = dec.next_logits();
    ASSERT_EQ(l.size(), v.size() + 2);
    for (std::size_t c = 0; c < l.size(); ++c) EXPECT_NEAR(l[c], full(static_cast<int>(n), static_cast<int>(c)), 1e-4);
    dec.push(tokens[n]);
  }
}

TEST(FaceModel, VertexEncoderIsPermutationEquivariantWithoutListPositions) {
  FaceFixture f(false);
  const std::vector<IVec3> v = some_vertices();
  const std::vector<int> perm = {3, 0, 4, 2, 1};
  std::vector<IVec3> pv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) pv[i] = v[perm[i]];
  nn::Tape<float> t;
  const nn::Matrix<float> r = t.value(f.model.encode_vertices(t, v));
  const nn::Matrix<float> pr = t.value(f.model.encode_vertices(t, pv));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int c = 0; c < r.cols(); ++c) EXPECT_NEAR(pr(static_cast<int>(i), c), r(perm[i], c), 1e-5);
  }
}

TEST(FaceModel, ListPositionsBreakEquivariance) {
  FaceFixture f(true);
  const std::vector<IVec3> v = some_vertices();
  std::vector<IVec3> pv = {v[1], v[0], v[2], v[3], v[4]};
  nn::Tape<float> t;
  const nn::Matrix<float> r = t.value(f.model.encode_vertices(t, v));
  const nn::Matrix<float> pr = t.value(f.model.encode_vertices(t, pv));
  double diff = 0;
  for (int c = 0; c < r.cols(); ++c) diff += std::abs(pr(0, c) - r(1, c));
  EXPECT_GT(diff, 1e-4);
}

TEST(FacePositions, FaceIdAndSlot) {
  const std::vector<int> tokens = {2, 3, 4, kFaceEnd, 3, 4, 5, 6, kFaceEnd, kFaceStop};
  const FacePositions p = face_positions(tokens, 30, 8);
  EXPECT_EQ(p.face, (std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1, 1, 2}));
  EXPECT_EQ(p.slot, (std::vector<int>{0, 1, 2, 3, 0, 1, 2, 3, 4, 0}));
  const FacePositions clamped = face_positions(tokens, 1, 2);
  EXPECT_EQ(clamped.face.back(), 1);
  EXPECT_EQ(*std::max_element(clamped.slot.begin(), clamped.slot.end()), 2);
}

TEST(PointEncoder, CoarseCellsAreFineCellsDividedByEight) {
  const PolyMesh box = testing::unit_box();
  const auto [normalized, transform] = normalize(testing::surface_cloud(box, 20000, 3));
  const EncoderPlan plan = plan_encoder(normalized, 128);
  std::set<IVec3, decltype(&zyx_less)> expected(&zyx_less);
  for (const IVec3& c : plan.stages[0].sites) {
    EXPECT_GE(std::min({c.x, c.y, c.z}), 0);
    EXPECT_LT(std::max({c.x, c.y, c.z}), 128);
    expected.insert({c.x / 8, c.y / 8, c.z / 8});
  }
  EXPECT_EQ(plan.coarse.size(), expected.size());
  for (const IVec3& c : plan.coarse) EXPECT_TRUE(expected.count(c)) << c.x << "," << c.y << "," << c.z;
  EXPECT_LE(plan.coarse.size(), 4096u);
  for (int s = 0; s < kEncoderStages; ++s) {
    EXPECT_EQ(plan.stages[s].neighbors.size(), plan.stages[s].sites.size() * kConvTaps);
  }
}

TEST(PointEncoder, ContextRowsMatchCoarseCells) {
  Rng rng(7);
  nn::ParamStore<float> store;
  const ModelConfig cfg = small_config();
  const PointEncoder<float> enc = PointEncoder<float>::create(store, "enc", cfg, rng);
  const auto [normalized, transform] = normalize(testing::surface_cloud(testing::unit_box(), 3000, 4));
  const ContextEmbeddings ctx = encode_point_cloud(normalized, enc, cfg.voxel_grid);
  EXPECT_EQ(ctx.features.rows(), static_cast<int>(ctx.indices.size()));
  EXPECT_EQ(ctx.features.cols(), cfg.width);
  for (const IVec3& c : ctx.indices) EXPECT_LT(std::max({c.x, c.y, c.z}), cfg.coarse_grid());
}

}  // namespace
}  // namespace polybuild::models
