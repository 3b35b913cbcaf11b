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


#include "polybuild/generation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polybuild/validity.hpp"

namespace polybuild {

void SamplerConfig::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error("sampler: top_p outside (0, 1]");
  if (max_vertex_iterations < 1 || max_face_iterations < 1) throw Error("sampler: iterations must be >= 1");
  if (max_vertices < 1 || max_faces < 1) throw Error("sampler: limits must be >= 1");
  if (max_vertex_tokens < 0 || max_face_tokens < 0 || max_face_size < 0) throw Error("sampler: negative limit");
}

void to_json(nlohmann::json& j, const SamplerConfig& c) {
  j = nlohmann::json{{"top_p", c.top_p},
                     {"max_vertex_iterations", c.max_vertex_iterations},
                     {"max_face_iterations", c.max_face_iterations},
                     {"redistribution", c.redistribution == Redistribution::kEven ? "even" : "proportional"},
                     {"seed", c.seed},
                     {"max_vertices", c.max_vertices},
                     {"max_faces", c.max_faces},
                     {"max_face_size", c.max_face_size},
                     {"max_vertex_tokens", c.max_vertex_tokens},
                     {"max_face_tokens", c.max_face_tokens},
                     {"greedy", c.greedy}};
}

void from_json(const nlohmann::json& j, SamplerConfig& c) {
  SamplerConfig d;
  c.top_p = j.value("top_p", d.top_p);
  c.max_vertex_iterations = j.value("max_vertex_iterations", d.max_vertex_iterations);
  c.max_face_iterations = j.value("max_face_iterations", d.max_face_iterations);
  const std::string mode = j.value("redistribution", std::string("even"));
  if (mode == "even") {
    c.redistribution = Redistribution::kEven;
  } else if (mode == "proportional") {
    c.redistribution = Redistribution::kProportional;
  } else {
    throw Error("sampler: unknown redistribution '" + mode + "'");
  }
  c.seed = j.value("seed", d.seed);
  c.max_vertices = j.value("max_vertices", d.max_vertices);
  c.max_faces = j.value("max_faces", d.max_faces);
  c.max_face_size = j.value("max_face_size", d.max_face_size);
  c.max_vertex_tokens = j.value("max_vertex_tokens", d.max_vertex_tokens);
  c.max_face_tokens = j.value("max_face_tokens", d.max_face_tokens);
  c.greedy = j.value("greedy", d.greedy);
  c.validate();
}

const char* to_string(Failure f) {
  switch (f) {
    case Failure::kNone: return "none";
    case Failure::kNoStopVertices: return "no-stop-vertices";
    case Failure::kNoStopFaces: return "no-stop-faces";
    case Failure::kFloorCoverage: return "floor-coverage";
    case Failure::kFloorConnectivity: return "floor-connectivity";
    case Failure::kDiagonalWalls: return "diagonal-walls";
    case Failure::kDeadEnd: return "dead-end";
    case Failure::kExhausted: return "exhausted";
  }
  return "?";
}

int nucleus_sample(std::span<const float> logits, std::span<const std::uint8_t> mask, const SamplerConfig& cfg,
                   Rng& rng) {
  if (logits.size() != mask.size()) throw Error("nucleus_sample: logits and mask sizes differ");
  if (!any_valid(mask)) throw DeadEnd();
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(static_cast<double>(logits[i]) - top);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  const std::vector<double> q = redistribute(probs, mask, cfg.redistribution);

  std::vector<int> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] > q[b]; });
  if (cfg.greedy) return order.front();

  std::size_t keep = 0;
  double mass = 0.0;
  while (keep < order.size() && q[order[keep]] > 0.0) {
    mass += q[order[keep]];
    ++keep;
    if (mass >= cfg.top_p) break;
  }
  if (keep == 0) keep = 1;
  double u = uniform01(rng) * mass;
  for (std::size_t i = 0; i < keep; ++i) {
    u -= q[order[i]];
    if (u < 0.0) return order[i];
  }
  return order[keep - 1];
}

VertexRollout generate_vertices(TokenStream& stream, const SamplerConfig& cfg, Rng& rng) {
  VertexRollout out;
  VertexDecodeState state(static_cast<std::size_t>(cfg.max_vertices));
  const int limit = cfg.max_vertex_tokens > 0 ? cfg.max_vertex_tokens : 3 * cfg.max_vertices + 1;
  while (static_cast<int>(out.tokens.size()) < limit) {
    const std::vector<float> logits = stream.next_logits();
    int tok;
    try {
      tok = nucleus_sample(logits, vertex_mask(state), cfg, rng);
    } catch (const DeadEnd&) {
      out.failure = Failure::kDeadEnd;
      return out;
    }
    out.tokens.push_back(tok);
    state.push(tok);
    if (tok == kVertexStop) {
      out.vertices = decode_vertices(out.tokens);
      return out;
    }
    stream.push(tok);
  }
  out.failure = Failure::kNoStopVertices;
  return out;
}

FaceRollout generate_faces(TokenStream& stream, std::size_t vertex_count, const SamplerConfig& cfg, Rng& rng) {
  FaceRollout out;
  FaceDecodeState state(vertex_count, static_cast<std::size_t>(cfg.max_faces),
                        static_cast<std::size_t>(cfg.max_face_size));
  const std::size_t face_size = cfg.max_face_size > 0 ? static_cast<std::size_t>(cfg.max_face_size) : vertex_count;
  const long long limit = cfg.max_face_tokens > 0
                              ? cfg.max_face_tokens
                              : static_cast<long long>(cfg.max_faces) * static_cast<long long>(face_size + 1) + 1;
  while (static_cast<long long>(out.tokens.size()) < limit) {
    const std::vector<float> logits = stream.next_logits();
    int tok;
    try {
      tok = nucleus_sample(logits, face_mask(state), cfg, rng);
    } catch (const DeadEnd&) {
      out.failure = Failure::kDeadEnd;
      return out;
    }
    out.tokens.push_back(tok);
    state.push(tok);
    if (tok == kFaceStop) {
      out.faces = decode_faces(out.tokens, vertex_count);
      return out;
    }
    stream.push(tok);
  }
  out.failure = Failure::kNoStopFaces;
  return out;
}

namespace {

class VertexStream : public TokenStream {
 public:
  VertexStream(const models::VertexModel<float>& m, const nn::Matrix<float>& ctx) : dec_(m, ctx) {}
  std::vector<float> next_logits() override { return dec_.next_logits(); }
  void push(int token) override { dec_.push(token); }

 private:
  models::VertexDecoder dec_;
};

class FaceStream : public TokenStream {
 public:
  FaceStream(const models::FaceModel<float>& m, const std::vector<IVec3>& v) : dec_(m, v) {}
  std::vector<float> next_logits() override { return dec_.next_logits(); }
  void push(int token) override { dec_.push(token); }

 private:
  models::FaceDecoder dec_;
};

Failure failure_of(Validity v) {
  switch (v) {
    case Validity::kMissingFloorVertices:
    case Validity::kMissingFloorFaces: return Failure::kFloorCoverage;
    case Validity::kFloorConnectivity: return Failure::kFloorConnectivity;
    case Validity::kDiagonalWalls: return Failure::kDiagonalWalls;
    case Validity::kOk: break;
  }
  return Failure::kNone;
}

}  // namespace

ModelProposer::ModelProposer(const models::VertexModel<float>& vertex_model,
                             const models::FaceModel<float>& face_model, const models::ContextEmbeddings& context,
                             const SamplerConfig& cfg)
    : vertex_model_(vertex_model), face_model_(face_model), context_(context), cfg_(cfg) {
  cfg_.max_vertices = std::min(cfg_.max_vertices, vertex_model.cfg.max_vertices);
  cfg_.max_faces = std::min(cfg_.max_faces, face_model.cfg.max_faces);
}

VertexRollout sample_vertices(const models::VertexModel<float>& model, const models::ContextEmbeddings& context,
                              const SamplerConfig& cfg, Rng& rng) {
  SamplerConfig c = cfg;
  c.max_vertices = std::min(c.max_vertices, model.cfg.max_vertices);
  VertexStream stream(model, context.features);
  return generate_vertices(stream, c, rng);
}

FaceRollout sample_faces(const models::FaceModel<float>& model, const std::vector<IVec3>& vertices,
                         const SamplerConfig& cfg, Rng& rng) {
  if (vertices.size() < 3) {
    FaceRollout out;
    out.failure = Failure::kDeadEnd;  // no polygon can be formed
    return out;
  }
  SamplerConfig c = cfg;
  c.max_faces = std::min(c.max_faces, model.cfg.max_faces);
  c.max_face_size = c.max_face_size > 0 ? std::min(c.max_face_size, model.cfg.max_face_size) : model.cfg.max_face_size;
  FaceStream stream(model, vertices);
  return generate_faces(stream, vertices.size(), c, rng);
}

VertexRollout ModelProposer::propose_vertices(Rng& rng) {
  return sample_vertices(vertex_model_, context_, cfg_, rng);
}

FaceRollout ModelProposer::propose_faces(const std::vector<IVec3>& vertices, Rng& rng) {
  return sample_faces(face_model_, vertices, cfg_, rng);
}

GenerationOutcome run_rejection_loop(MeshProposer& proposer, const PointCloud& normalized, const LatticeBox& box,
                                     const NormTransform& transform, const SamplerConfig& cfg, Rng& rng) {
  cfg.validate();
  GenerationOutcome out;
  auto reject = [&](Failure f, const std::string& detail) {
    out.history.push_back(f);
    out.details.push_back(detail);
  };
  for (int vi = 0; vi < cfg.max_vertex_iterations; ++vi) {
    VertexRollout v = proposer.propose_vertices(rng);
    ++out.vertex_calls;
    if (v.failure != Failure::kNone) {
      reject(v.failure, to_string(v.failure));
      continue;
    }
    for (int fi = 0; fi < cfg.max_face_iterations; ++fi) {
      FaceRollout f = proposer.propose_faces(v.vertices, rng);
      ++out.face_calls;
      if (f.failure != Failure::kNone) {
        reject(f.failure, to_string(f.failure));
        continue;
      }
      QuantizedMesh mesh;
      mesh.vertices = v.vertices;
      mesh.faces = std::move(f.faces);
      mesh.transform = transform;
      mesh.box = box;
      const Validity verdict = check_mesh(mesh, normalized);
      if (verdict == Validity::kOk) {
        out.world = dequantize(mesh);
        out.mesh = std::move(mesh);
        return out;
      }
      reject(failure_of(verdict), to_string(verdict));
      if (verdict == Validity::kMissingFloorVertices) break;
    }
  }
  out.failure = Failure::kExhausted;
  return out;
}

GenerationOutcome reconstruct_mesh(const PointCloud& cloud, const models::VertexModel<float>& vertex_model,
                                   const models::FaceModel<float>& face_model, const SamplerConfig& cfg) {
  const auto [normalized, transform] = normalize(cloud);
  const LatticeBox box = bounding_box(normalized);
  const models::ContextEmbeddings context =
      models::encode_point_cloud(normalized, vertex_model.encoder, vertex_model.cfg.voxel_grid);
  ModelProposer proposer(vertex_model, face_model, context, cfg);
  Rng rng(cfg.seed);
  return run_rejection_loop(proposer, normalized, box, transform, cfg, rng);
}

}  // namespace polybuild
