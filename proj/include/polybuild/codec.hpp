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

#include <cstddef>
#include <span>
#include <vector>

#include "polybuild/geometry.hpp"

namespace polybuild {

// Vertex stream: coordinate values 0..255 are their own token ids, 256 stops.
inline constexpr int kVertexStop = 256;
inline constexpr int kVertexVocab = 257;

// Face stream: 0 stops, 1 closes a face, k >= 2 is vertex index k - 2.
inline constexpr int kFaceStop = 0;
inline constexpr int kFaceEnd = 1;
inline constexpr int kFaceIndexOffset = 2;

inline constexpr std::size_t kMaxVertices = 100;
inline constexpr std::size_t kMaxFaces = 500;

/// Structured decoding failure; `position()` is the offending token offset.
class CodecError : public Error {
 public:
  CodecError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

using TokenSequence = std::vector<int>;

/// (z, y, x) triples of the canonical vertex list followed by the stop token.
TokenSequence encode_vertices(const QuantizedMesh& mesh);
std::vector<IVec3> decode_vertices(std::span<const int> tokens);

/// Offset vertex indices per face, an end-face token after every face and a
/// final stop token.
TokenSequence encode_faces(const QuantizedMesh& mesh);
std::vector<Face> decode_faces(std::span<const int> tokens, std::size_t vertex_count);

}  // namespace polybuild
