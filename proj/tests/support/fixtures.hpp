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

// Hand-built meshes, scripted proposers and helpers shared by the unit tests
// and the acceptance binary.

#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "polybuild/codec.hpp"
#include "polybuild/generation.hpp"
#include "polybuild/geometry.hpp"
#include "polybuild/random.hpp"

namespace polybuild::testing {

/// Axis-aligned box [lo, hi]: floor (index 0, facing down), four walls,
/// roof (facing up).
inline PolyMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  PolyMesh m;
  m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  m.faces = {{0, 3, 2, 1}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}, {4, 5, 6, 7}};
  return m;
}

inline PolyMesh unit_box() { return box_mesh({0, 0, 0}, {10, 8, 6}); }

/// Same box with the y = lo wall split along its diagonal into two
/// triangles; the shared edge runs from (lo.x, lo.y, lo.z) to
/// (hi.x, lo.y, hi.z).
inline PolyMesh diagonal_wall_box(const Vec3& lo, const Vec3& hi) {
  PolyMesh m = box_mesh(lo, hi);
  m.faces[1] = {0, 1, 5};
  m.faces.push_back({0, 5, 4});
  return m;
}

/// Box whose x = hi wall leans inward by `lean` at the top, so the floor
/// edge on that side borders a sloped (roof-classified) face.
inline PolyMesh leaning_box(const Vec3& lo, const Vec3& hi, double lean) {
  PolyMesh m = box_mesh(lo, hi);
  m.vertices[5].x -= lean;
  m.vertices[6].x -= lean;
  return m;
}

/// Dense cloud over every face of `mesh`, floor included.
inline PointCloud surface_cloud(const PolyMesh& mesh, std::size_t n = 4000, std::uint64_t seed = 7) {
  return sample_surface(mesh, n, seed);
}

/// A mesh quantized on the lattice of a cloud, with the normalized cloud.
struct Scene {
  QuantizedMesh mesh;
  PointCloud normalized;
  NormTransform transform;
  LatticeBox box;
};

inline Scene make_scene(const PolyMesh& mesh, const PointCloud& cloud) {
  Scene s;
  auto [normalized, transform] = normalize(cloud);
  s.normalized = std::move(normalized);
  s.transform = transform;
  s.box = bounding_box(s.normalized);
  s.mesh = canonicalize(quantize(mesh, s.transform, s.box));
  return s;
}

/// Proposer replaying scripted vertex and face rollouts; the last entry of
/// each script repeats forever.
class ScriptedProposer : public MeshProposer {
 public:
  std::vector<VertexRollout> vertex_script;
  std::vector<FaceRollout> face_script;
  int vertex_calls = 0;
  int face_calls = 0;

  VertexRollout propose_vertices(Rng&) override {
    const std::size_t i = std::min<std::size_t>(vertex_calls++, vertex_script.size() - 1);
    return vertex_script[i];
  }
  FaceRollout propose_faces(const std::vector<IVec3>&, Rng&) override {
    const std::size_t i = std::min<std::size_t>(face_calls++, face_script.size() - 1);
    return face_script[i];
  }
};

inline VertexRollout vertex_rollout(const QuantizedMesh& m) {
  VertexRollout r;
  r.vertices = m.vertices;
  r.tokens = encode_vertices(m);
  return r;
}

inline FaceRollout face_rollout(const QuantizedMesh& m) {
  FaceRollout r;
  r.faces = m.faces;
  r.tokens = encode_faces(m);
  return r;
}

/// Random canonical mesh on the lattice: `n` distinct vertices and
/// `f` faces of 3..6 distinct corners.
inline QuantizedMesh random_canonical_mesh(Rng& rng, int n, int f) {
  QuantizedMesh m;
  std::vector<IVec3> v;
  while (static_cast<int>(v.size()) < n) {
    IVec3 p{static_cast<int>(uniform_index(rng, 256)), static_cast<int>(uniform_index(rng, 256)),
            static_cast<int>(uniform_index(rng, 256))};
    if (std::find(v.begin(), v.end(), p) == v.end()) v.push_back(p);
  }
  m.vertices = v;
  for (int i = 0; i < f; ++i) {
    const int size = 3 + static_cast<int>(uniform_index(rng, std::min(4, n - 2)));
    std::vector<int> pool(n);
    for (int k = 0; k < n; ++k) pool[k] = k;
    Face face;
    for (int k = 0; k < size; ++k) {
      const std::size_t j = k + uniform_index(rng, n - k);
      std::swap(pool[k], pool[j]);
      face.push_back(pool[k]);
    }
    m.faces.push_back(face);
  }
  return canonicalize(m);
}

}  // namespace polybuild::testing
