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

#include <array>
#include <vector>

#include "polybuild/geometry.hpp"
#include "polybuild/models/config.hpp"
#include "polybuild/nn/layers.hpp"

namespace polybuild::models {

inline constexpr int kConvTaps = 27;
inline constexpr int kPointFeatures = 4;  // occupancy, mean in-voxel offset xyz
inline constexpr int kEncoderStages = 3;

/// Parameter-free part of the sparse encoder: voxel occupancy, neighbour
/// tables and pooling maps of every stage.
struct EncoderPlan {
  struct Stage {
    std::vector<IVec3> sites;       // active cells at this stage's resolution
    std::vector<int> neighbors;     // sites.size() x 27, -1 when inactive
    std::vector<int> parent_of;     // site -> index in the next stage
  };
  nn::Matrix<double> features;      // fine sites x 4
  std::array<Stage, kEncoderStages> stages;
  std::vector<IVec3> coarse;        // active cells after the last pooling
};

/// Voxelizes a normalized cloud over [-1, 1]^3 on a grid^3 lattice.
EncoderPlan plan_encoder(const PointCloud& normalized, int grid);

/// Occupied coarse cells and their features.
struct ContextEmbeddings {
  std::vector<IVec3> indices;
  nn::Matrix<float> features;
};

template <typename T>
struct PointEncoder {
  std::array<nn::LinearLayer<T>, kEncoderStages> conv;
  nn::LinearLayer<T> proj;
  std::array<nn::Parameter<T>*, 3> axis{};  // learned embedding per coarse i, j, k
  int coarse_grid = 16;

  static PointEncoder create(nn::ParamStore<T>& store, const std::string& name, const ModelConfig& cfg, Rng& rng);
  /// [coarse cells x width] context on the tape.
  int forward(nn::Tape<T>& t, const EncoderPlan& plan) const;
};

/// Inference-mode encoding.
ContextEmbeddings encode_point_cloud(const PointCloud& normalized, const PointEncoder<float>& encoder, int grid);

}  // namespace polybuild::models
