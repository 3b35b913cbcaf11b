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


#include "polybuild/models/config.hpp"

#include <cstdio>

namespace polybuild::models {

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("model config: ") + what);
  };
  require(width > 0 && heads > 0 && width % heads == 0, "width must be a positive multiple of heads");
  require(ff > 0 && layers > 0 && face_encoder_layers >= 0, "ff and layers must be positive");
  require(max_vertices >= 1 && max_vertices <= static_cast<int>(kMaxVertices), "max_vertices outside [1, 100]");
  require(max_faces >= 1 && max_faces <= static_cast<int>(kMaxFaces), "max_faces outside [1, 500]");
  require(max_face_size >= 3, "max_face_size below 3");
  require(voxel_grid >= 8 && voxel_grid % 8 == 0, "voxel_grid must be a multiple of 8");
  for (int c : encoder_channels) require(c > 0, "encoder channels must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout outside [0, 1)");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"width", c.width},
                     {"heads", c.heads},
                     {"ff", c.ff},
                     {"layers", c.layers},
                     {"face_encoder_layers", c.face_encoder_layers},
                     {"max_vertices", c.max_vertices},
                     {"max_faces", c.max_faces},
                     {"max_face_size", c.max_face_size},
                     {"voxel_grid", c.voxel_grid},
                     {"encoder_channels", c.encoder_channels},
                     {"vertex_list_positions", c.vertex_list_positions},
                     {"dropout", c.dropout}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.width = j.value("width", d.width);
  c.heads = j.value("heads", d.heads);
  c.ff = j.value("ff", d.ff);
  c.layers = j.value("layers", d.layers);
  c.face_encoder_layers = j.value("face_encoder_layers", d.face_encoder_layers);
  c.max_vertices = j.value("max_vertices", d.max_vertices);
  c.max_faces = j.value("max_faces", d.max_faces);
  c.max_face_size = j.value("max_face_size", d.max_face_size);
  c.voxel_grid = j.value("voxel_grid", d.voxel_grid);
  c.encoder_channels = j.value("encoder_channels", d.encoder_channels);
  c.vertex_list_positions = j.value("vertex_list_positions", d.vertex_list_positions);
  c.dropout = j.value("dropout", d.dropout);
  c.validate();
}

std::uint64_t config_hash(const nlohmann::json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace polybuild::models
