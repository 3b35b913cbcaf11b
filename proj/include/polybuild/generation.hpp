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

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polybuild/codec.hpp"
#include "polybuild/constraints.hpp"
#include "polybuild/geometry.hpp"
#include "polybuild/models/face_model.hpp"
#include "polybuild/models/vertex_model.hpp"
#include "polybuild/random.hpp"

namespace polybuild {

struct SamplerConfig {
  double top_p = 0.9;
  int max_vertex_iterations = 10;
  int max_face_iterations = 10;
  Redistribution redistribution = Redistribution::kEven;
  std::uint64_t seed = 0;
  int max_vertices = kMaxVertices;
  int max_faces = kMaxFaces;
  int max_face_size = 0;       // 0: bounded only by the vertex count
  int max_vertex_tokens = 0;   // 0: 3 * max_vertices + 1
  int max_face_tokens = 0;     // 0: enough for max_faces faces
  bool greedy = false;         // argmax over the masked distribution

  void validate() const;
};

void to_json(nlohmann::json& j, const SamplerConfig& c);
void from_json(const nlohmann::json& j, SamplerConfig& c);

enum class Failure {
  kNone,
  kNoStopVertices,
  kNoStopFaces,
  kFloorCoverage,
  kFloorConnectivity,
  kDiagonalWalls,
  kDeadEnd,
  kExhausted,
};
const char* to_string(Failure f);

/// Raised by nucleus_sample when the mask leaves nothing to sample.
class DeadEnd : public Error {
 public:
  DeadEnd() : Error("dead end") {}
};

/// softmax -> mask + redistribute -> smallest descending prefix with mass
/// >= top_p -> renormalize -> draw. Greedy mode returns the masked argmax
/// (lowest index on ties).
int nucleus_sample(std::span<const float> logits, std::span<const std::uint8_t> mask, const SamplerConfig& cfg,
                   Rng& rng);

/// Source of next-token logits for one rollout.
class TokenStream {
 public:
  virtual ~TokenStream() = default;
  virtual std::vector<float> next_logits() = 0;
  virtual void push(int token) = 0;
};

struct VertexRollout {
  std::vector<IVec3> vertices;
  TokenSequence tokens;
  Failure failure = Failure::kNone;
};

struct FaceRollout {
  std::vector<Face> faces;
  TokenSequence tokens;
  Failure failure = Failure::kNone;
};

VertexRollout generate_vertices(TokenStream& stream, const SamplerConfig& cfg, Rng& rng);
FaceRollout generate_faces(TokenStream& stream, std::size_t vertex_count, const SamplerConfig& cfg, Rng& rng);

/// Proposes vertex sets and face sets for one building; the unit the
/// rejection loop drives. Implemented by the trained models and by scripted
/// stubs in tests.
/// One constrained rollout of a trained model.
VertexRollout sample_vertices(const models::VertexModel<float>& model, const models::ContextEmbeddings& context,
                              const SamplerConfig& cfg, Rng& rng);
FaceRollout sample_faces(const models::FaceModel<float>& model, const std::vector<IVec3>& vertices,
                         const SamplerConfig& cfg, Rng& rng);

class MeshProposer {
 public:
  virtual ~MeshProposer() = default;
  virtual VertexRollout propose_vertices(Rng& rng) = 0;
  virtual FaceRollout propose_faces(const std::vector<IVec3>& vertices, Rng& rng) = 0;
};

/// Proposer backed by the two trained modules.
class ModelProposer : public MeshProposer {
 public:
  ModelProposer(const models::VertexModel<float>& vertex_model, const models::FaceModel<float>& face_model,
                const models::ContextEmbeddings& context, const SamplerConfig& cfg);
  VertexRollout propose_vertices(Rng& rng) override;
  FaceRollout propose_faces(const std::vector<IVec3>& vertices, Rng& rng) override;

 private:
  const models::VertexModel<float>& vertex_model_;
  const models::FaceModel<float>& face_model_;
  const models::ContextEmbeddings& context_;
  SamplerConfig cfg_;
};

struct GenerationOutcome {
  std::optional<QuantizedMesh> mesh;  // present iff every check passed
  std::optional<PolyMesh> world;      // mesh mapped back to meters
  Failure failure = Failure::kNone;
  int vertex_calls = 0;
  int face_calls = 0;
  std::vector<Failure> history;        // every rejected attempt, in order
  std::vector<std::string> details;    // check verdict per rejected attempt
};

/// The rejection loop over a normalized cloud: outer vertex loop, inner face
/// loop; missing floor vertices regenerate vertices, other check failures
/// regenerate faces.
GenerationOutcome run_rejection_loop(MeshProposer& proposer, const PointCloud& normalized, const LatticeBox& box,
                                     const NormTransform& transform, const SamplerConfig& cfg, Rng& rng);

/// Full reconstruction of a cloud in meters with the trained modules.
GenerationOutcome reconstruct_mesh(const PointCloud& cloud, const models::VertexModel<float>& vertex_model,
                                   const models::FaceModel<float>& face_model, const SamplerConfig& cfg);

}  // namespace polybuild
