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


#include "polybuild/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "polybuild/codec.hpp"
#include "polybuild/models/face_model.hpp"
#include "polybuild/models/vertex_model.hpp"

namespace polybuild {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheckResult gradient_check(nn::ParamStore<double>& store, const std::function<int(nn::Tape<double>&)>& loss,
                               int samples, double epsilon, std::uint64_t seed) {
  GradCheckResult r;
  store.zero_grad();
  {
    nn::Tape<double> tape;
    tape.backward(loss(tape));
  }
  std::vector<std::pair<nn::Parameter<double>*, std::size_t>> entries;
  for (const auto& p : store.all()) {
    r.parameters += p->value.size();
    for (std::size_t i = 0; i < p->value.size(); ++i) entries.emplace_back(p.get(), i);
  }
  auto eval = [&] {
    nn::Tape<double> tape;
    return tape.value(loss(tape))(0, 0);
  };
  Rng rng(seed);
  for (int s = 0; s < samples && !entries.empty(); ++s) {
    auto [p, i] = entries[uniform_index(rng, entries.size())];
    const double saved = p->value.data()[i];
    p->value.data()[i] = saved + epsilon;
    const double up = eval();
    p->value.data()[i] = saved - epsilon;
    const double down = eval();
    p->value.data()[i] = saved;
    const double numeric = (up - down) / (2 * epsilon);
    const double analytic = p->grad.empty() ? 0.0 : p->grad.data()[i];
    const double rel = relative_error(analytic, numeric);
    r.max_abs_error = std::max(r.max_abs_error, std::abs(analytic - numeric));
    if (rel >= r.max_rel_error) {
      r.max_rel_error = rel;
      r.worst = p->name + "[" + std::to_string(i) + "]";
    }
    ++r.checked;
  }
  return r;
}

models::ModelConfig miniature_config() {
  models::ModelConfig c;
  c.width = 4;
  c.heads = 2;
  c.ff = 8;
  c.layers = 1;
  c.face_encoder_layers = 1;
  c.max_vertices = 6;
  c.max_faces = 6;
  c.max_face_size = 4;
  c.voxel_grid = 16;
  c.encoder_channels = {2, 2, 2};
  c.dropout = 0.0;
  return c;
}

namespace {

/// A small tent: 5 vertices, square floor, two sloped faces, two gables.
QuantizedMesh miniature_mesh() {
  QuantizedMesh m;
  m.vertices = {{10, 10, 0}, {200, 10, 0}, {200, 150, 0}, {10, 150, 0}, {105, 80, 120}};
  m.faces = {{0, 3, 2, 1}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return canonicalize(m);
}

PointCloud miniature_cloud() {
  PointCloud c;
  Rng rng(99);
  for (int i = 0; i < 60; ++i) {
    c.points.push_back({uniform(rng, -0.8, 0.8), uniform(rng, -0.6, 0.6), uniform(rng, -0.5, 0.5)});
  }
  return c;
}

}  // namespace

GradCheckResult miniature_gradient_check(int samples, double epsilon, std::uint64_t seed) {
  const models::ModelConfig cfg = miniature_config();
  nn::ParamStore<double> store;
  Rng init(seed);
  // Larger init than training so that every path carries signal.
  const auto vm = models::VertexModel<double>::create(store, cfg, init);
  const auto fm = models::FaceModel<double>::create(store, cfg, init);
  for (const auto& p : store.all()) {
    for (double& v : p->value.values()) v += 0.3 * standard_normal(init);
  }
  const QuantizedMesh mesh = miniature_mesh();
  const TokenSequence vt = encode_vertices(mesh);
  const TokenSequence ft = encode_faces(mesh);
  const models::EncoderPlan plan = models::plan_encoder(miniature_cloud(), cfg.voxel_grid);
  auto loss = [&](nn::Tape<double>& t) {
    return nn::add(t, vm.loss(t, plan, vt), fm.loss(t, mesh.vertices, ft));
  };
  return gradient_check(store, loss, samples, epsilon, derive_seed(seed, 1));
}

GradCheckResult linear_gradient_check(int samples, double epsilon, std::uint64_t seed) {
  nn::ParamStore<double> store;
  Rng rng(seed);
  const auto layer = nn::LinearLayer<double>::create(store, "linear", 5, 3, rng, true, 1.0);
  nn::Matrix<double> x(4, 5);
  for (double& v : x.values()) v = standard_normal(rng);
  const std::vector<int> targets = {0, 2, 1, 2};
  auto loss = [&](nn::Tape<double>& t) { return nn::cross_entropy(t, layer.forward(t, t.constant(x)), targets); };
  return gradient_check(store, loss, samples, epsilon, derive_seed(seed, 1));
}

}  // namespace polybuild
