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

#include "polybuild/nn/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polybuild::nn::functional {

template <typename T>
Matrix<T> linear(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>* b) {
  Matrix<T> y(x.rows(), w.cols());
  if (b && !b->empty()) {
    if (b->cols() != w.cols()) throw ShapeError("linear: bias " + b->shape_string());
    for (int i = 0; i < y.rows(); ++i) std::copy(b->data(), b->data() + b->cols(), y.row(i).data());
    gemm(false, false, x, w, y, true);
  } else {
    gemm(false, false, x, w, y, false);
  }
  return y;
}

template <typename T>
T gelu(T x) {
  constexpr T c = T(0.7978845608028654);  // sqrt(2/pi)
  const T u = c * (x + T(0.044715) * x * x * x);
  return T(0.5) * x * (T(1) + std::tanh(u));
}

template <typename T>
T gelu_grad(T x) {
  constexpr T c = T(0.7978845608028654);
  const T u = c * (x + T(0.044715) * x * x * x);
  const T th = std::tanh(u);
  return T(0.5) * (T(1) + th) + T(0.5) * x * (T(1) - th * th) * c * (T(1) + T(3) * T(0.044715) * x * x);
}

template <typename T>
void gelu_inplace(Matrix<T>& x) {
  for (T& v : x.values()) v = gelu(v);
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& gamma, const Matrix<T>& beta, std::vector<T>* inv_std,
                     Matrix<T>* normalized) {
  const int n = x.cols();
  if (gamma.cols() != n || beta.cols() != n) throw ShapeError("layer_norm: gain/bias width");
  Matrix<T> y(x.rows(), n);
  if (inv_std) inv_std->assign(x.rows(), T(0));
  if (normalized) *normalized = Matrix<T>(x.rows(), n);
  for (int i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    T mean = 0;
    for (T v : row) mean += v;
    mean /= T(n);
    T var = 0;
    for (T v : row) var += (v - mean) * (v - mean);
    var /= T(n);
    const T rstd = T(1) / std::sqrt(var + T(kLayerNormEps));
    if (inv_std) (*inv_std)[i] = rstd;
    auto out = y.row(i);
    for (int j = 0; j < n; ++j) {
      const T xhat = (row[j] - mean) * rstd;
      if (normalized) (*normalized)(i, j) = xhat;
      out[j] = xhat * gamma(0, j) + beta(0, j);
    }
  }
  return y;
}

template <typename T>
void softmax_rows(Matrix<T>& x) {
  for (int i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    T mx = -std::numeric_limits<T>::infinity();
    for (T v : row) mx = std::max(mx, v);
    T sum = 0;
    for (T& v : row) {
      v = std::isinf(v) && v < 0 ? T(0) : std::exp(v - mx);
      sum += v;
    }
    for (T& v : row) v /= sum;
  }
}

template <typename T>
Matrix<T> column_block(const Matrix<T>& m, int begin, int width) {
  Matrix<T> out(m.rows(), width);
  for (int i = 0; i < m.rows(); ++i) {
    std::copy(m.data() + static_cast<std::size_t>(i) * m.cols() + begin,
              m.data() + static_cast<std::size_t>(i) * m.cols() + begin + width, out.row(i).data());
  }
  return out;
}

template <typename T>
void add_column_block(Matrix<T>& dst, const Matrix<T>& src, int begin) {
  for (int i = 0; i < src.rows(); ++i) {
    T* d = dst.data() + static_cast<std::size_t>(i) * dst.cols() + begin;
    const auto s = src.row(i);
    for (int j = 0; j < src.cols(); ++j) d[j] += s[j];
  }
}

template <typename T>
Matrix<T> attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v, int heads, bool causal,
                    int causal_offset, std::vector<Matrix<T>>* probs) {
  const int width = q.cols();
  if (k.cols() != width || v.cols() != width || k.rows() != v.rows() || width % heads != 0) {
    throw ShapeError("attention: q " + q.shape_string() + " k " + k.shape_string() + " v " + v.shape_string());
  }
  const int dh = width / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  Matrix<T> out(q.rows(), width);
  if (probs) probs->clear();
  for (int h = 0; h < heads; ++h) {
    const Matrix<T> qh = column_block(q, h * dh, dh);
    const Matrix<T> kh = column_block(k, h * dh, dh);
    const Matrix<T> vh = column_block(v, h * dh, dh);
    Matrix<T> s;
    gemm(false, true, qh, kh, s, false);
    for (int i = 0; i < s.rows(); ++i) {
      auto row = s.row(i);
      for (int j = 0; j < s.cols(); ++j) {
        row[j] = (causal && j > i + causal_offset) ? -std::numeric_limits<T>::infinity() : row[j] * scale;
      }
    }
    softmax_rows(s);
    Matrix<T> oh;
    gemm(false, false, s, vh, oh, false);
    add_column_block(out, oh, h * dh);
    if (probs) probs->push_back(std::move(s));
  }
  return out;
}

#define POLYBUILD_INSTANTIATE(T)                                                                            \
  template Matrix<T> linear(const Matrix<T>&, const Matrix<T>&, const Matrix<T>*);                          \
  template T gelu(T);                                                                                       \
  template T gelu_grad(T);                                                                                  \
  template void gelu_inplace(Matrix<T>&);                                                                   \
  template Matrix<T> layer_norm(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, std::vector<T>*,      \
                                Matrix<T>*);                                                                \
  template void softmax_rows(Matrix<T>&);                                                                   \
  template Matrix<T> attention(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, int, bool, int,        \
                               std::vector<Matrix<T>>*);                                                    \
  template Matrix<T> column_block(const Matrix<T>&, int, int);                                              \
  template void add_column_block(Matrix<T>&, const Matrix<T>&, int);

POLYBUILD_INSTANTIATE(float)
POLYBUILD_INSTANTIATE(double)

#undef POLYBUILD_INSTANTIATE

}  // namespace polybuild::nn::functional
