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

#include <string>
#include <vector>

#include "polybuild/nn/autograd.hpp"

namespace polybuild::nn {

inline constexpr double kInitStd = 0.02;

template <typename T>
struct LinearLayer {
  Parameter<T>* weight = nullptr;
  Parameter<T>* bias = nullptr;

  static LinearLayer create(ParamStore<T>& store, const std::string& name, int in, int out, Rng& rng,
                            bool with_bias = true, double stddev = kInitStd);
  int forward(Tape<T>& t, int x) const;
  Matrix<T> apply(const Matrix<T>& x) const;
};

template <typename T>
struct LayerNormLayer {
  Parameter<T>* gamma = nullptr;
  Parameter<T>* beta = nullptr;

  static LayerNormLayer create(ParamStore<T>& store, const std::string& name, int width, Rng& rng);
  int forward(Tape<T>& t, int x) const;
  Matrix<T> apply(const Matrix<T>& x) const;
};

template <typename T>
struct AttentionLayer {
  LinearLayer<T> query, key, value, out;
  int heads = 1;

  static AttentionLayer create(ParamStore<T>& store, const std::string& name, int width, int heads, Rng& rng);
  /// Queries from `x`, keys and values from `source` (x itself for
  /// self-attention).
  int forward(Tape<T>& t, int x, int source, bool causal) const;
};

struct StackShape {
  int width = 256;
  int heads = 4;
  int ff = 512;
  int layers = 4;
};

/// Pre-normalization transformer block: self-attention, optional
/// cross-attention to a context sequence, feed-forward; each sub-layer adds
/// back into the residual stream.
template <typename T>
struct DecoderBlock {
  LayerNormLayer<T> ln_self;
  AttentionLayer<T> self_attn;
  bool has_cross = false;
  LayerNormLayer<T> ln_cross;
  AttentionLayer<T> cross_attn;
  LayerNormLayer<T> ln_ff;
  LinearLayer<T> ff_in, ff_out;

  static DecoderBlock create(ParamStore<T>& store, const std::string& name, const StackShape& shape, bool cross,
                             Rng& rng);
  int forward(Tape<T>& t, int x, int context, bool causal) const;
};

/// Key/value cache of one stack for token-by-token decoding.
template <typename T>
struct StackCache {
  std::vector<Matrix<T>> keys, values;              // self-attention, grows per step
  std::vector<Matrix<T>> ctx_keys, ctx_values;      // cross-attention, fixed
  int length = 0;
};

template <typename T>
struct TransformerStack {
  std::vector<DecoderBlock<T>> blocks;
  LayerNormLayer<T> final_ln;
  StackShape shape;
  bool causal = true;
  bool cross = false;

  static TransformerStack create(ParamStore<T>& store, const std::string& name, const StackShape& shape,
                                 bool causal, bool cross, Rng& rng);

  /// Full-sequence pass; `context` < 0 skips cross-attention.
  int forward(Tape<T>& t, int x, int context) const;

  /// Starts incremental decoding; precomputes cross-attention keys/values.
  StackCache<T> start(const Matrix<T>* context) const;
  /// Consumes one [1 x width] input row, returns the normalized output row.
  Matrix<T> step(const Matrix<T>& row, StackCache<T>& cache) const;
};

}  // namespace polybuild::nn
