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

#include "polybuild/nn/tensor.hpp"

#include "polybuild/simd/kernels.hpp"

namespace polybuild::nn {

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

namespace {

void gemm_nn(const Matrix<float>& a, const Matrix<float>& b, Matrix<float>& c, bool accumulate) {
  simd::kernels().gemm_f32(a.rows(), b.cols(), a.cols(), a.data(), a.cols(), b.data(), b.cols(), c.data(), c.cols(),
                           accumulate);
}

void gemm_nn(const Matrix<double>& a, const Matrix<double>& b, Matrix<double>& c, bool accumulate) {
  const int m = a.rows(), n = b.cols(), k = a.cols();
  if (!accumulate) c.fill(0.0);
  for (int i = 0; i < m; ++i) {
    double* crow = c.data() + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = a(i, p);
      const double* brow = b.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c, bool accumulate) {
  const int m = trans_a ? a.cols() : a.rows();
  const int ka = trans_a ? a.rows() : a.cols();
  const int kb = trans_b ? b.cols() : b.rows();
  const int n = trans_b ? b.rows() : b.cols();
  if (ka != kb) throw ShapeError("gemm: inner dimensions " + a.shape_string() + " vs " + b.shape_string());
  if (c.rows() != m || c.cols() != n) {
    if (accumulate) throw ShapeError("gemm: output shape " + c.shape_string());
    c = Matrix<T>(m, n);
  }
  if (!trans_a && !trans_b) {
    gemm_nn(a, b, c, accumulate);
  } else if (trans_a && !trans_b) {
    gemm_nn(transpose(a), b, c, accumulate);
  } else if (!trans_a && trans_b) {
    gemm_nn(a, transpose(b), c, accumulate);
  } else {
    gemm_nn(transpose(a), transpose(b), c, accumulate);
  }
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> c(a.rows(), b.cols());
  gemm(false, false, a, b, c, false);
  return c;
}

template <>
void axpy<float>(float alpha, std::span<const float> x, std::span<float> y) {
  simd::kernels().axpy_f32(alpha, x.data(), y.data(), x.size());
}

template <>
void axpy<double>(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <>
float dot<float>(std::span<const float> a, std::span<const float> b) {
  return simd::kernels().dot_f32(a.data(), b.data(), a.size());
}

template <>
double dot<double>(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template Matrix<float> transpose(const Matrix<float>&);
template Matrix<double> transpose(const Matrix<double>&);
template void gemm(bool, bool, const Matrix<float>&, const Matrix<float>&, Matrix<float>&, bool);
template void gemm(bool, bool, const Matrix<double>&, const Matrix<double>&, Matrix<double>&, bool);
template Matrix<float> matmul(const Matrix<float>&, const Matrix<float>&);
template Matrix<double> matmul(const Matrix<double>&, const Matrix<double>&);

}  // namespace polybuild::nn
