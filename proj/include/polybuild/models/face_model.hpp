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

#include <span>
#include <vector>

#include "polybuild/geometry.hpp"
#include "polybuild/models/config.hpp"
#include "polybuild/nn/layers.hpp"

namespace polybuild::models {

/// Pointer-network face model conditioned on a quantized vertex list.
/// Vertices are embedded as the sum of per-axis value embeddings (plus an
/// optional list-index embedding) and refined by a non-causal stack into R.
/// Face tokens are embedded as face id + slot in face + gathered R row (or a
/// learned special embedding for stop / end-face); the decoder cross-attends
/// to R and scores a pointer vector against [stop key; end key; R].
template <typename T>
struct FaceModel {
  ModelConfig cfg;
  std::array<nn::Parameter<T>*, 3> axis_value{};  // 256 x width each
  nn::Parameter<T>* list_position = nullptr;      // max_vertices x width
  nn::TransformerStack<T> vertex_encoder;
  nn::Parameter<T>* face_id = nullptr;   // (max_faces + 1) x width
  nn::Parameter<T>* slot = nullptr;      // (max_face_size + 1) x width
  nn::Parameter<T>* special = nullptr;   // 2 x width: stop, end-face inputs
  nn::Parameter<T>* start = nullptr;     // 1 x width
  nn::TransformerStack<T> decoder;
  nn::LinearLayer<T> pointer;
  nn::Parameter<T>* keys = nullptr;      // 2 x width: stop, end-face targets

  static FaceModel create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// R: [V x width].
  int encode_vertices(nn::Tape<T>& t, const std::vector<IVec3>& vertices) const;
  /// Embeddings of a face token prefix given R.
  int embed_tokens(nn::Tape<T>& t, int encoded, std::span<const int> tokens) const;
  /// Row n holds the (V + 2)-way pointer logits of token n.
  int logits(nn::Tape<T>& t, int encoded, std::span<const int> tokens) const;
  int loss(nn::Tape<T>& t, const std::vector<IVec3>& vertices, std::span<const int> tokens) const;
};

/// Face id and in-face slot of every token of a face stream.
struct FacePositions {
  std::vector<int> face;
  std::vector<int> slot;
};
FacePositions face_positions(std::span<const int> tokens, int max_faces, int max_face_size);

/// Incremental pointer decoder with a key/value cache.
class FaceDecoder {
 public:
  FaceDecoder(const FaceModel<float>& model, const std::vector<IVec3>& vertices);
  /// Logits over vertex_count + 2 targets.
  const std::vector<float>& next_logits();
  void push(int token);
  const nn::Matrix<float>& encoded() const { return encoded_; }

 private:
  const FaceModel<float>& model_;
  nn::Matrix<float> encoded_;
  nn::Matrix<float> keys_;
  nn::StackCache<float> cache_;
  nn::Matrix<float> pending_;
  std::vector<float> logits_;
  bool fresh_ = false;
  int face_ = 0;
  int slot_ = 0;
};

}  // namespace polybuild::models
