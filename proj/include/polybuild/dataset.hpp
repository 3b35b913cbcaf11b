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

#include <filesystem>
#include <string>
#include <vector>

#include "polybuild/codec.hpp"
#include "polybuild/geometry.hpp"
#include "polybuild/models/point_encoder.hpp"

namespace polybuild::training {

/// A paired ground-truth mesh and scan, both in meters.
struct DataSample {
  std::string name;
  PolyMesh mesh;
  PointCloud cloud;
};

/// Keeps samples with at most max_vertices vertices and max_faces faces.
template <typename S>
std::vector<S> filter_dataset(std::vector<S> samples, std::size_t max_vertices = kMaxVertices,
                              std::size_t max_faces = kMaxFaces) {
  std::vector<S> kept;
  for (S& s : samples) {
    if (s.mesh.vertices.size() <= max_vertices && s.mesh.faces.size() <= max_faces) kept.push_back(std::move(s));
  }
  return kept;
}

/// A sample in model space: normalized cloud, canonical quantized mesh,
/// both token streams and the encoder plan.
struct PreparedSample {
  std::string name;
  PointCloud normalized;
  QuantizedMesh mesh;
  TokenSequence vertex_tokens;
  TokenSequence face_tokens;
  models::EncoderPlan plan;
};

PreparedSample prepare_sample(const DataSample& sample, int voxel_grid, bool with_plan = true);

/// Corpus file layout written by gen-corpus.
std::filesystem::path mesh_path(const std::filesystem::path& dir, const std::string& name);
std::filesystem::path cloud_path(const std::filesystem::path& dir, const std::string& name);

/// Reads every sample listed in DIR/manifest.json.
std::vector<DataSample> load_corpus(const std::filesystem::path& dir);

}  // namespace polybuild::training
