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

#include "polybuild/nn/autograd.hpp"

#include <cmath>
#include <limits>

#include "polybuild/nn/functional.hpp"

namespace polybuild::nn {

// ---------------------------------------------------------------------------
// ParamStore

template <typename T>
Parameter<T>& ParamStore<T>::add(const std::string& name, int rows, int cols, Init init, double stddev, Rng& rng) {
  if (by_name_.count(name)) throw Error("duplicate parameter " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->value = Matrix<T>(rows, cols);
  p->grad = Matrix<T>(rows, cols);
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kOnes:
      p->value.fill(T(1));
      break;
    case Init::kNormal:
      for (T& v : p->value.values()) v = static_cast<T>(stddev * standard_normal(rng));
      break;
  }
  Parameter<T>& ref = *p;
  by_name_[name] = p.get();
  params_.push_back(std::move(p));
  return ref;
}

template <typename T>
Parameter<T>* ParamStore<T>::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

template <typename T>
const Parameter<T>* ParamStore<T>::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

template <typename T>
Parameter<T>& ParamStore<T>::at(const std::string& name) {
  Parameter<T>* p = find(name);
  if (!p) throw Error("unknown parameter " + name);
  return *p;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& p : params_) p->grad.fill(T(0));
}

template <typename T>
std::size_t ParamStore<T>::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

// ---------------------------------------------------------------------------
// Tape

template <typename T>
int Tape<T>::constant(Matrix<T> value) {
  Node& n = nodes_.emplace_back();
  n.own_value = std::move(value);
  n.value = &n.own_value;
  return static_cast<int>(nodes_.size() - 1);
}

template <typename T>
int Tape<T>::param(Parameter<T>& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return it->second;
  Node& n = nodes_.emplace_back();
  n.value = &p.value;
  n.grad = &p.grad;
  n.requires_grad = true;
  const int id = static_cast<int>(nodes_.size() - 1);
  param_ids_[&p] = id;
  return id;
}

template <typename T>
int Tape<T>::record(Matrix<T> value, bool requires_grad, Backward backward) {
  for (T v : value.values()) {
    if (!std::isfinite(v)) throw Error("non-finite value in forward pass");
  }
  Node& n = nodes_.emplace_back();
  n.own_value = std::move(value);
  n.value = &n.own_value;
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  return static_cast<int>(nodes_.size() - 1);
}

template <typename T>
const Matrix<T>& Tape<T>::value(int id) const {
  return *nodes_[id].value;
}

template <typename T>
Matrix<T>& Tape<T>::grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad) {
    n.own_grad = Matrix<T>(n.value->rows(), n.value->cols());
    n.grad = &n.own_grad;
  }
  return *n.grad;
}

template <typename T>
void Tape<T>::backward(int root) {
  if (value(root).rows() != 1 || value(root).cols() != 1) throw ShapeError("backward: root must be 1x1");
  grad(root)(0, 0) += T(1);
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || !n.grad) continue;
    n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

template <typename T>
void add_into(Matrix<T>& dst, const Matrix<T>& src) {
  T* d = dst.data();
  const T* s = src.data();
  for (std::size_t i = 0; i < src.size(); ++i) d[i] += s[i];
}

template <typename T>
void require_same(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
  if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
}

}  // namespace

template <typename T>
int matmul(Tape<T>& t, int a, int b) {
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  Matrix<T> out;
  gemm(false, false, t.value(a), t.value(b), out, false);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    if (tp.requires_grad(a)) gemm(false, true, g, tp.value(b), tp.grad(a), true);
    if (tp.requires_grad(b)) gemm(true, false, tp.value(a), g, tp.grad(b), true);
  });
}

template <typename T>
int matmul_nt(Tape<T>& t, int a, int b) {
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  Matrix<T> out;
  gemm(false, true, t.value(a), t.value(b), out, false);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    if (tp.requires_grad(a)) gemm(false, false, g, tp.value(b), tp.grad(a), true);
    if (tp.requires_grad(b)) gemm(true, false, g, tp.value(a), tp.grad(b), true);
  });
}

template <typename T>
int linear(Tape<T>& t, int x, int w, int bias) {
  const bool rg = t.requires_grad(x) || t.requires_grad(w) || (bias >= 0 && t.requires_grad(bias));
  if (t.value(x).cols() != t.value(w).rows()) {
    throw ShapeError("linear: input " + t.value(x).shape_string() + " weight " + t.value(w).shape_string());
  }
  Matrix<T> out = functional::linear(t.value(x), t.value(w), bias >= 0 ? &t.value(bias) : nullptr);
  return t.record(std::move(out), rg, [x, w, bias](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    if (tp.requires_grad(x)) gemm(false, true, g, tp.value(w), tp.grad(x), true);
    if (tp.requires_grad(w)) gemm(true, false, tp.value(x), g, tp.grad(w), true);
    if (bias >= 0 && tp.requires_grad(bias)) {
      Matrix<T>& gb = tp.grad(bias);
      for (int i = 0; i < g.rows(); ++i) {
        const auto row = g.row(i);
        for (int j = 0; j < g.cols(); ++j) gb(0, j) += row[j];
      }
    }
  });
}

template <typename T>
int add(Tape<T>& t, int a, int b) {
  require_same(t.value(a), t.value(b), "add");
  Matrix<T> out = t.value(a);
  add_into(out, t.value(b));
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(std::move(out), rg, [a, b](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    if (tp.requires_grad(a)) add_into(tp.grad(a), g);
    if (tp.requires_grad(b)) add_into(tp.grad(b), g);
  });
}

template <typename T>
int add_row(Tape<T>& t, int a, int row) {
  const Matrix<T>& r = t.value(row);
  if (r.rows() != 1 || r.cols() != t.value(a).cols()) throw ShapeError("add_row: " + r.shape_string());
  Matrix<T> out = t.value(a);
  for (int i = 0; i < out.rows(); ++i) {
    auto o = out.row(i);
    for (int j = 0; j < out.cols(); ++j) o[j] += r(0, j);
  }
  const bool rg = t.requires_grad(a) || t.requires_grad(row);
  return t.record(std::move(out), rg, [a, row](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    if (tp.requires_grad(a)) add_into(tp.grad(a), g);
    if (tp.requires_grad(row)) {
      Matrix<T>& gr = tp.grad(row);
      for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
      }
    }
  });
}

template <typename T>
int scale(Tape<T>& t, int a, T s) {
  Matrix<T> out = t.value(a);
  for (T& v : out.values()) v *= s;
  return t.record(std::move(out), t.requires_grad(a), [a, s](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    Matrix<T>& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += s * g.data()[i];
  });
}

template <typename T>
int gelu(Tape<T>& t, int a) {
  Matrix<T> out = t.value(a);
  functional::gelu_inplace(out);
  return t.record(std::move(out), t.requires_grad(a), [a](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    const Matrix<T>& x = tp.value(a);
    Matrix<T>& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * functional::gelu_grad(x.data()[i]);
  });
}

template <typename T>
int layer_norm(Tape<T>& t, int x, int gamma, int beta) {
  std::vector<T> inv_std;
  Matrix<T> xhat;
  Matrix<T> out = functional::layer_norm(t.value(x), t.value(gamma), t.value(beta), &inv_std, &xhat);
  const bool rg = t.requires_grad(x) || t.requires_grad(gamma) || t.requires_grad(beta);
  return t.record(std::move(out), rg,
                  [x, gamma, beta, inv_std = std::move(inv_std), xhat = std::move(xhat)](Tape<T>& tp, int self) {
                    const Matrix<T>& g = tp.grad(self);
                    const Matrix<T>& gam = tp.value(gamma);
                    const int n = g.cols();
                    if (tp.requires_grad(gamma) || tp.requires_grad(beta)) {
                      Matrix<T>& gg = tp.grad(gamma);
                      Matrix<T>& gb = tp.grad(beta);
                      for (int i = 0; i < g.rows(); ++i) {
                        for (int j = 0; j < n; ++j) {
                          gg(0, j) += g(i, j) * xhat(i, j);
                          gb(0, j) += g(i, j);
                        }
                      }
                    }
                    if (!tp.requires_grad(x)) return;
                    Matrix<T>& gx = tp.grad(x);
                    std::vector<T> dxhat(n);
                    for (int i = 0; i < g.rows(); ++i) {
                      T mean_d = 0, mean_dx = 0;
                      for (int j = 0; j < n; ++j) {
                        dxhat[j] = g(i, j) * gam(0, j);
                        mean_d += dxhat[j];
                        mean_dx += dxhat[j] * xhat(i, j);
                      }
                      mean_d /= T(n);
                      mean_dx /= T(n);
                      for (int j = 0; j < n; ++j) {
                        gx(i, j) += inv_std[i] * (dxhat[j] - mean_d - xhat(i, j) * mean_dx);
                      }
                    }
                  });
}

template <typename T>
int attention(Tape<T>& t, int q, int k, int v, int heads, bool causal) {
  std::vector<Matrix<T>> probs;
  Matrix<T> out = functional::attention(t.value(q), t.value(k), t.value(v), heads, causal, 0, &probs);
  const bool rg = t.requires_grad(q) || t.requires_grad(k) || t.requires_grad(v);
  return t.record(std::move(out), rg, [q, k, v, heads, probs = std::move(probs)](Tape<T>& tp, int self) {
    using functional::add_column_block;
    using functional::column_block;
    const Matrix<T>& g = tp.grad(self);
    const int width = g.cols();
    const int dh = width / heads;
    const T sc = T(1) / std::sqrt(T(dh));
    for (int h = 0; h < heads; ++h) {
      const Matrix<T>& p = probs[h];
      const Matrix<T> gh = column_block(g, h * dh, dh);
      const Matrix<T> qh = column_block(tp.value(q), h * dh, dh);
      const Matrix<T> kh = column_block(tp.value(k), h * dh, dh);
      const Matrix<T> vh = column_block(tp.value(v), h * dh, dh);
      if (tp.requires_grad(v)) {
        Matrix<T> dv;
        gemm(true, false, p, gh, dv, false);
        add_column_block(tp.grad(v), dv, h * dh);
      }
      if (!tp.requires_grad(q) && !tp.requires_grad(k)) continue;
      Matrix<T> dp;
      gemm(false, true, gh, vh, dp, false);
      // softmax backward: ds = p * (dp - sum(dp * p))
      for (int i = 0; i < dp.rows(); ++i) {
        T dotp = 0;
        for (int j = 0; j < dp.cols(); ++j) dotp += dp(i, j) * p(i, j);
        for (int j = 0; j < dp.cols(); ++j) dp(i, j) = p(i, j) * (dp(i, j) - dotp) * sc;
      }
      if (tp.requires_grad(q)) {
        Matrix<T> dq;
        gemm(false, false, dp, kh, dq, false);
        add_column_block(tp.grad(q), dq, h * dh);
      }
      if (tp.requires_grad(k)) {
        Matrix<T> dk;
        gemm(true, false, dp, qh, dk, false);
        add_column_block(tp.grad(k), dk, h * dh);
      }
    }
  });
}

template <typename T>
int gather_rows(Tape<T>& t, int table, const std::vector<int>& indices) {
  const Matrix<T>& tab = t.value(table);
  Matrix<T> out(static_cast<int>(indices.size()), tab.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || r >= tab.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(r) + " outside table of " +
                       std::to_string(tab.rows()) + " rows");
    }
    std::copy(tab.row(r).begin(), tab.row(r).end(), out.row(static_cast<int>(i)).begin());
  }
  return t.record(std::move(out), t.requires_grad(table), [table, indices](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    Matrix<T>& gt = tp.grad(table);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto src = g.row(static_cast<int>(i));
      auto dst = gt.row(indices[i]);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

template <typename T>
int concat_rows(Tape<T>& t, int a, int b) {
  const Matrix<T>& va = t.value(a);
  const Matrix<T>& vb = t.value(b);
  if (va.cols() != vb.cols()) throw ShapeError("concat_rows: " + va.shape_string() + " vs " + vb.shape_string());
  Matrix<T> out(va.rows() + vb.rows(), va.cols());
  std::copy(va.data(), va.data() + va.size(), out.data());
  std::copy(vb.data(), vb.data() + vb.size(), out.data() + va.size());
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  const int rows_a = va.rows();
  return t.record(std::move(out), rg, [a, b, rows_a](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    const std::size_t split = static_cast<std::size_t>(rows_a) * g.cols();
    if (tp.requires_grad(a)) {
      Matrix<T>& ga = tp.grad(a);
      for (std::size_t i = 0; i < split; ++i) ga.data()[i] += g.data()[i];
    }
    if (tp.requires_grad(b)) {
      Matrix<T>& gb = tp.grad(b);
      for (std::size_t i = split; i < g.size(); ++i) gb.data()[i - split] += g.data()[i];
    }
  });
}

template <typename T>
int dropout(Tape<T>& t, int a) {
  if (!t.training || t.dropout <= 0.0) return a;
  if (!t.rng) throw Error("dropout: training tape without rng");
  const double keep = 1.0 - t.dropout;
  const T inv = static_cast<T>(1.0 / keep);
  Matrix<T> mask(t.value(a).rows(), t.value(a).cols());
  for (T& m : mask.values()) m = bernoulli(*t.rng, keep) ? inv : T(0);
  Matrix<T> out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask.data()[i];
  return t.record(std::move(out), t.requires_grad(a), [a, mask = std::move(mask)](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    Matrix<T>& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * mask.data()[i];
  });
}

template <typename T>
int cross_entropy(Tape<T>& t, int logits, const std::vector<int>& targets) {
  const Matrix<T>& z = t.value(logits);
  if (static_cast<int>(targets.size()) != z.rows()) throw ShapeError("cross_entropy: target count");
  Matrix<T> probs = z;
  functional::softmax_rows(probs);
  int count = 0;
  T loss = 0;
  for (int i = 0; i < z.rows(); ++i) {
    const int y = targets[i];
    if (y < 0) continue;
    if (y >= z.cols()) throw ShapeError("cross_entropy: target " + std::to_string(y) + " >= " +
                                        std::to_string(z.cols()));
    // log p_y = z_y - logsumexp(z)
    T mx = -std::numeric_limits<T>::infinity();
    for (T v : z.row(i)) mx = std::max(mx, v);
    T sum = 0;
    for (T v : z.row(i)) sum += std::exp(v - mx);
    loss -= z(i, y) - mx - std::log(sum);
    ++count;
  }
  if (count == 0) throw Error("cross_entropy: all positions masked");
  Matrix<T> out(1, 1, loss / T(count));
  return t.record(std::move(out), t.requires_grad(logits),
                  [logits, targets, count, probs = std::move(probs)](Tape<T>& tp, int self) {
                    const T g = tp.grad(self)(0, 0) / T(count);
                    Matrix<T>& gz = tp.grad(logits);
                    for (int i = 0; i < probs.rows(); ++i) {
                      if (targets[i] < 0) continue;
                      for (int j = 0; j < probs.cols(); ++j) gz(i, j) += g * probs(i, j);
                      gz(i, targets[i]) -= g;
                    }
                  });
}

template <typename T>
int mean_pool(Tape<T>& t, int x, const std::vector<int>& parent_of, int parent_count) {
  const Matrix<T>& v = t.value(x);
  if (static_cast<int>(parent_of.size()) != v.rows()) throw ShapeError("mean_pool: parent map size");
  Matrix<T> out(parent_count, v.cols());
  std::vector<T> counts(parent_count, T(0));
  for (int i = 0; i < v.rows(); ++i) {
    const int p = parent_of[i];
    counts[p] += T(1);
    auto dst = out.row(p);
    const auto src = v.row(i);
    for (int j = 0; j < v.cols(); ++j) dst[j] += src[j];
  }
  for (int p = 0; p < parent_count; ++p) {
    if (counts[p] == T(0)) throw ShapeError("mean_pool: parent without children");
    for (T& val : out.row(p)) val /= counts[p];
  }
  return t.record(std::move(out), t.requires_grad(x),
                  [x, parent_of, counts = std::move(counts)](Tape<T>& tp, int self) {
                    const Matrix<T>& g = tp.grad(self);
                    Matrix<T>& gx = tp.grad(x);
                    for (int i = 0; i < gx.rows(); ++i) {
                      const int p = parent_of[i];
                      const auto src = g.row(p);
                      auto dst = gx.row(i);
                      for (int j = 0; j < gx.cols(); ++j) dst[j] += src[j] / counts[p];
                    }
                  });
}

template <typename T>
int im2col(Tape<T>& t, int x, const std::vector<int>& neighbors, int kernel_size) {
  const Matrix<T>& v = t.value(x);
  const int n = static_cast<int>(neighbors.size()) / kernel_size;
  const int c = v.cols();
  Matrix<T> out(n, kernel_size * c);
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < kernel_size; ++kk) {
      const int src = neighbors[static_cast<std::size_t>(i) * kernel_size + kk];
      if (src < 0) continue;
      std::copy(v.row(src).begin(), v.row(src).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(kk) * c);
    }
  }
  return t.record(std::move(out), t.requires_grad(x), [x, neighbors, kernel_size, n, c](Tape<T>& tp, int self) {
    const Matrix<T>& g = tp.grad(self);
    Matrix<T>& gx = tp.grad(x);
    for (int i = 0; i < n; ++i) {
      for (int kk = 0; kk < kernel_size; ++kk) {
        const int src = neighbors[static_cast<std::size_t>(i) * kernel_size + kk];
        if (src < 0) continue;
        const T* gsrc = g.row(i).data() + static_cast<std::ptrdiff_t>(kk) * c;
        auto dst = gx.row(src);
        for (int j = 0; j < c; ++j) dst[j] += gsrc[j];
      }
    }
  });
}

#define POLYBUILD_INSTANTIATE(T)                                                    \
  template class ParamStore<T>;                                                     \
  template class Tape<T>;                                                           \
  template int matmul(Tape<T>&, int, int);                                          \
  template int matmul_nt(Tape<T>&, int, int);                                       \
  template int linear(Tape<T>&, int, int, int);                                     \
  template int add(Tape<T>&, int, int);                                             \
  template int add_row(Tape<T>&, int, int);                                         \
  template int scale(Tape<T>&, int, T);                                             \
  template int gelu(Tape<T>&, int);                                                 \
  template int layer_norm(Tape<T>&, int, int, int);                                 \
  template int attention(Tape<T>&, int, int, int, int, bool);                       \
  template int gather_rows(Tape<T>&, int, const std::vector<int>&);                 \
  template int concat_rows(Tape<T>&, int, int);                                     \
  template int dropout(Tape<T>&, int);                                              \
  template int cross_entropy(Tape<T>&, int, const std::vector<int>&);               \
  template int mean_pool(Tape<T>&, int, const std::vector<int>&, int);              \
  template int im2col(Tape<T>&, int, const std::vector<int>&, int);

POLYBUILD_INSTANTIATE(float)
POLYBUILD_INSTANTIATE(double)

#undef POLYBUILD_INSTANTIATE

}  // namespace polybuild::nn
