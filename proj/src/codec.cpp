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

#include "polybuild/codec.hpp"

#include <algorithm>

namespace polybuild {

TokenSequence encode_vertices(const QuantizedMesh& mesh) {
  if (!is_canonical(mesh)) throw Error("encode_vertices: mesh is not canonical");
  if (mesh.vertices.size() > kMaxVertices) throw Error("encode_vertices: more than 100 vertices");
  TokenSequence out;
  out.reserve(3 * mesh.vertices.size() + 1);
  for (const IVec3& v : mesh.vertices) {
    out.push_back(v.z);
    out.push_back(v.y);
    out.push_back(v.x);
  }
  out.push_back(kVertexStop);
  return out;
}

std::vector<IVec3> decode_vertices(std::span<const int> tokens) {
  std::vector<IVec3> out;
  int partial[3] = {0, 0, 0};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t < 0 || t > kVertexStop) throw CodecError("token value " + std::to_string(t) + " out of range", i);
    const std::size_t slot = i % 3;
    if (t == kVertexStop) {
      if (slot != 0) throw CodecError("stop token inside triple", i);
      if (i + 1 != tokens.size()) throw CodecError("tokens after stop", i + 1);
      return out;
    }
    partial[slot] = t;
    if (slot == 2) out.push_back({partial[2], partial[1], partial[0]});
  }
  throw CodecError("missing stop token", tokens.size());
}

TokenSequence encode_faces(const QuantizedMesh& mesh) {
  if (!is_canonical(mesh)) throw Error("encode_faces: mesh is not canonical");
  if (mesh.faces.size() > kMaxFaces) throw Error("encode_faces: more than 500 faces");
  TokenSequence out;
  for (const Face& f : mesh.faces) {
    if (f.size() < 3) throw Error("encode_faces: face with " + std::to_string(f.size()) + " vertices");
    for (int idx : f) out.push_back(idx + kFaceIndexOffset);
    out.push_back(kFaceEnd);
  }
  out.push_back(kFaceStop);
  return out;
}

std::vector<Face> decode_faces(std::span<const int> tokens, std::size_t vertex_count) {
  std::vector<Face> out;
  Face current;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t < 0) throw CodecError("negative token " + std::to_string(t), i);
    if (t == kFaceStop) {
      if (!current.empty()) throw CodecError("unterminated face before stop", i);
      if (i + 1 != tokens.size()) throw CodecError("tokens after stop", i + 1);
      return out;
    }
    if (t == kFaceEnd) {
      if (current.empty()) throw CodecError("end-face token without open face", i);
      if (current.size() < 3) throw CodecError("face with " + std::to_string(current.size()) + " vertices", i);
      out.push_back(std::move(current));
      current.clear();
      continue;
    }
    const std::size_t idx = static_cast<std::size_t>(t - kFaceIndexOffset);
    if (idx >= vertex_count) throw CodecError("vertex index " + std::to_string(idx) + " out of range", i);
    current.push_back(static_cast<int>(idx));
  }
  throw CodecError("missing stop token", tokens.size());
}

}  // namespace polybuild
