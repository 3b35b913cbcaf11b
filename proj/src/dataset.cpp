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


#include "polybuild/dataset.hpp"

#include <json.hpp>

#include "polybuild/mesh_io.hpp"

namespace polybuild::training {

PreparedSample prepare_sample(const DataSample& sample, int voxel_grid, bool with_plan) {
  PreparedSample p;
  p.name = sample.name;
  auto [normalized, transform] = normalize(sample.cloud);
  const LatticeBox box = bounding_box(normalized);
  p.mesh = canonicalize(quantize(sample.mesh, transform, box));
  p.normalized = std::move(normalized);
  p.vertex_tokens = encode_vertices(p.mesh);
  p.face_tokens = encode_faces(p.mesh);
  if (with_plan) p.plan = models::plan_encoder(p.normalized, voxel_grid);
  return p;
}

std::filesystem::path mesh_path(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + ".obj");
}

std::filesystem::path cloud_path(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + ".xyz");
}

std::vector<DataSample> load_corpus(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error((dir / "manifest.json").string() + ": " + e.what());
  }
  if (!manifest.contains("samples")) throw Error((dir / "manifest.json").string() + ": no samples listed");
  std::vector<DataSample> out;
  for (const auto& entry : manifest["samples"]) {
    DataSample s;
    s.name = entry.at("name").get<std::string>();
    s.mesh = read_mesh(mesh_path(dir, s.name));
    s.cloud = read_cloud(cloud_path(dir, s.name));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace polybuild::training
