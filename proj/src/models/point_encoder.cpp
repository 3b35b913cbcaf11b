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


#include "polybuild/models/point_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace polybuild::models {
namespace {

std::int64_t cell_key(const IVec3& c) {
  return (static_cast<std::int64_t>(c.x) << 32) | (static_cast<std::int64_t>(c.y) << 16) | c.z;
}

bool xyz_less(const IVec3& a, const IVec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

std::vector<int> neighbor_table(const std::vector<IVec3>& sites) {
  std::unordered_map<std::int64_t, int> index;
  index.reserve(sites.size() * 2);
  for (std::size_t i = 0; i < sites.size(); ++i) index.emplace(cell_key(sites[i]), static_cast<int>(i));
  std::vector<int> out(sites.size() * kConvTaps, -1);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    int tap = 0;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz, ++tap) {
          const IVec3 n{sites[i].x + dx, sites[i].y + dy, sites[i].z + dz};
          if (n.x < 0 || n.y < 0 || n.z < 0) continue;
          auto it = index.find(cell_key(n));
          if (it != index.end()) out[i * kConvTaps + tap] = it->second;
        }
      }
    }
  }
  return out;
}

}  // namespace

EncoderPlan plan_encoder(const PointCloud& normalized, int grid) {
  if (normalized.empty()) throw Error("empty input");
  struct Acc {
    double n = 0, ox = 0, oy = 0, oz = 0;
  };
  std::map<IVec3, Acc, decltype(&xyz_less)> cells(&xyz_less);
  for (const Vec3& p : normalized.points) {
    IVec3 c;
    double off[3];
    for (int a = 0; a < 3; ++a) {
      const double u = (p[a] + 1.0) * 0.5 * grid;
      const int i = std::clamp(static_cast<int>(std::floor(u)), 0, grid - 1);
      off[a] = std::clamp(u - i, 0.0, 1.0) * 2.0 - 1.0;
      (a == 0 ? c.x : a == 1 ? c.y : c.z) = i;
    }
    Acc& acc = cells[c];
    acc.n += 1;
    acc.ox += off[0];
    acc.oy += off[1];
    acc.oz += off[2];
  }

  EncoderPlan plan;
  plan.features = nn::Matrix<double>(static_cast<int>(cells.size()), kPointFeatures);
  std::vector<IVec3> sites;
  sites.reserve(cells.size());
  for (const auto& [c, acc] : cells) {
    const int r = static_cast<int>(sites.size());
    plan.features(r, 0) = 1.0;
    plan.features(r, 1) = acc.ox / acc.n;
    plan.features(r, 2) = acc.oy / acc.n;
    plan.features(r, 3) = acc.oz / acc.n;
    sites.push_back(c);
  }

  for (int s = 0; s < kEncoderStages; ++s) {
    EncoderPlan::Stage& st = plan.stages[s];
    st.neighbors = neighbor_table(sites);
    std::vector<IVec3> parents;
    for (const IVec3& c : sites) parents.push_back({c.x >> 1, c.y >> 1, c.z >> 1});
    std::vector<IVec3> next = parents;
    std::sort(next.begin(), next.end(), xyz_less);
    next.erase(std::unique(next.begin(), next.end()), next.end());
    st.parent_of.reserve(parents.size());
    for (const IVec3& p : parents) {
      st.parent_of.push_back(
          static_cast<int>(std::lower_bound(next.begin(), next.end(), p, xyz_less) - next.begin()));
    }
    st.sites = std::move(sites);
    sites = std::move(next);
  }
  plan.coarse = std::move(sites);
  return plan;
}

template <typename T>
PointEncoder<T> PointEncoder<T>::create(nn::ParamStore<T>& store, const std::string& name, const ModelConfig& cfg,
                                        Rng& rng) {
  PointEncoder e;
  int in = kPointFeatures;
  for (int s = 0; s < kEncoderStages; ++s) {
    const int out = cfg.encoder_channels[s];
    e.conv[s] = nn::LinearLayer<T>::create(store, name + ".conv" + std::to_string(s), kConvTaps * in, out, rng, true,
                                           1.0 / std::sqrt(static_cast<double>(kConvTaps * in)));
    in = out;
  }
  e.proj = nn::LinearLayer<T>::create(store, name + ".proj", in, cfg.width, rng, true,
                                      1.0 / std::sqrt(static_cast<double>(in)));
  e.coarse_grid = cfg.coarse_grid();
  const char* axes[3] = {"i", "j", "k"};
  for (int a = 0; a < 3; ++a) {
    e.axis[a] = &store.add(name + ".cell_" + axes[a], e.coarse_grid, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  }
  return e;
}

template <typename T>
int PointEncoder<T>::forward(nn::Tape<T>& t, const EncoderPlan& plan) const {
  int x = t.constant(nn::cast<T>(plan.features));
  for (int s = 0; s < kEncoderStages; ++s) {
    const EncoderPlan::Stage& st = plan.stages[s];
    x = nn::gelu(t, conv[s].forward(t, nn::im2col(t, x, st.neighbors, kConvTaps)));
    const int parents = s + 1 < kEncoderStages ? static_cast<int>(plan.stages[s + 1].sites.size())
                                               : static_cast<int>(plan.coarse.size());
    x = nn::mean_pool(t, x, st.parent_of, parents);
  }
  x = proj.forward(t, x);
  std::array<std::vector<int>, 3> idx;
  for (const IVec3& c : plan.coarse) {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < 0 || c[a] >= coarse_grid) throw Error("coarse cell index outside grid");
      idx[a].push_back(c[a]);
    }
  }
  for (int a = 0; a < 3; ++a) x = nn::add(t, x, nn::gather_rows(t, t.param(*axis[a]), idx[a]));
  return x;
}

ContextEmbeddings encode_point_cloud(const PointCloud& normalized, const PointEncoder<float>& encoder, int grid) {
  const EncoderPlan plan = plan_encoder(normalized, grid);
  nn::Tape<float> tape;
  const int out = encoder.forward(tape, plan);
  return {plan.coarse, tape.value(out)};
}

template struct PointEncoder<float>;
template struct PointEncoder<double>;

}  // namespace polybuild::models
