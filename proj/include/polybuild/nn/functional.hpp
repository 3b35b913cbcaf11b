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

#include <vector>

#include "polybuild/nn/tensor.hpp"

// Forward math shared by the autodiff ops and the cached inference path.
namespace polybuild::nn::functional {

inline constexpr double kLayerNormEps = 1e-5;

/// y = x W + b (b broadcast over rows; may be empty).
template <typename T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>* b);

template <typename T>
T gelu(T x);
template <typename T>
T gelu_grad(T x);
template <typename T>
void gelu_inplace(Matrix<T>& x);

/// Row-wise normalization. Optionally returns per-row 1/sigma and the
/// normalized rows for the backward pass.
template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta,
                     std::vector<T>* inv_std = nullptr, Matrix<T>* normalized = nullptr);

/// In-place numerically stable row softmax.
template <typename T>
void softmax_rows(Matrix<T>& x);

/// Multi-head scaled dot-product attention. Query i attends to key j when
/// j <= i + causal_offset (causal) or always (non-causal). `probs`, when
/// given, receives one [Lq x Lk] matrix per head.
template <typename T>
Matrix<T> attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v, int heads, bool causal,
                    int causal_offset = 0, std::vector<Matrix<T>>* probs = nullptr);

/// Columns [begin, begin + width) as a new matrix.
template <typename T>
Matrix<T> column_block(const Matrix<T>& m, int begin, int width);
template <typename T>
void add_column_block(Matrix<T>& dst, const Matrix<T>& src, int begin);

}  // namespace polybuild::nn::functional
