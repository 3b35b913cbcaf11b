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

#include "polybuild/models/point_encoder.hpp"

namespace polybuild::models {

/// Point-cloud-conditioned autoregressive model over vertex tokens.
/// Token embedding = coordinate type (position mod 3) + sequence position +
/// value (257-way); the decoder cross-attends to the encoder context.
template <typename T>
struct VertexModel {
  ModelConfig cfg;
  PointEncoder<T> encoder;
  nn::Parameter<T>* coord = nullptr;     // 3 x width
  nn::Parameter<T>* position = nullptr;  // (3 * max_vertices + 2) x width
  nn::Parameter<T>* value = nullptr;     // 257 x width
  nn::Parameter<T>* start = nullptr;     // 1 x width, input of the first step
  nn::TransformerStack<T> decoder;
  nn::LinearLayer<T> head;

  static VertexModel create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// Embeddings of `tokens` placed at positions first, first+1, ...
  /// Throws "sequence too long" past the position table.
  int embed_tokens(nn::Tape<T>& t, std::span<const int> tokens, int first = 0) const;
  /// Row n holds the logits of token n given tokens[0..n) and the context.
  int logits(nn::Tape<T>& t, int context, std::span<const int> tokens) const;
  /// Mean next-token cross-entropy of a full sequence.
  int loss(nn::Tape<T>& t, const EncoderPlan& plan, std::span<const int> tokens) const;
};

/// Incremental decoder with a key/value cache.
class VertexDecoder {
 public:
  VertexDecoder(const VertexModel<float>& model, const nn::Matrix<float>& context);
  /// Logits (257) of the next token.
  const std::vector<float>& next_logits();
  void push(int token);
  int length() const { return length_; }

 private:
  const VertexModel<float>& model_;
  nn::StackCache<float> cache_;
  nn::Matrix<float> pending_;
  std::vector<float> logits_;
  bool fresh_ = false;
  int length_ = 0;
};

}  // namespace polybuild::models
