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
#include <cstdint>
#include <string>

#include <json.hpp>

#include "polybuild/codec.hpp"
#include "polybuild/nn/layers.hpp"

namespace polybuild::models {

/// Architecture of the encoder and both modules. Every field is echoed into
/// checkpoints and manifests.
struct ModelConfig {
  int width = 256;
  int heads = 4;
  int ff = 512;
  int layers = 4;              // decoder blocks per module
  int face_encoder_layers = 4;  // non-causal blocks refining vertex embeddings
  int max_vertices = kMaxVertices;
  int max_faces = kMaxFaces;
  int max_face_size = 32;
  int voxel_grid = 128;
  std::array<int, 3> encoder_channels = {16, 32, 64};
  bool vertex_list_positions = true;  // list-index embedding in the face module
  double dropout = 0.2;

  nn::StackShape decoder_shape() const { return {width, heads, ff, layers}; }
  nn::StackShape face_encoder_shape() const { return {width, heads, ff, face_encoder_layers}; }
  int coarse_grid() const { return voxel_grid >> 3; }
  int vertex_positions() const { return 3 * max_vertices + 2; }
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Stable 64-bit FNV-1a hash of a JSON document's canonical dump.
std::uint64_t config_hash(const nlohmann::json& j);
std::string hex_hash(std::uint64_t h);

}  // namespace polybuild::models
