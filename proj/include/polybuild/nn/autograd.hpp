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

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "polybuild/nn/tensor.hpp"
#include "polybuild/random.hpp"

namespace polybuild::nn {

template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
};

enum class Init { kZeros, kOnes, kNormal };

/// Owns the named parameters of one model in creation order. Names are
/// unique; creation order is the checkpoint order.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(const std::string& name, int rows, int cols, Init init, double stddev, Rng& rng);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;
  Parameter<T>& at(const std::string& name);

  const std::vector<std::unique_ptr<Parameter<T>>>& all() const { return params_; }
  void zero_grad();
  std::size_t count() const;

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, Parameter<T>*> by_name_;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so walking the
/// tape backwards visits every node after all of its consumers.
template <typename T>
class Tape {
 public:
  using Id = int;
  using Backward = std::function<void(Tape&, Id)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Id constant(Matrix<T> value);
  /// Leaf bound to a parameter; gradients land directly in `p.grad`.
  Id param(Parameter<T>& p);
  /// Appends a computed node. `requires_grad` should be true when any input
  /// needs a gradient; otherwise `backward` is never called.
  Id record(Matrix<T> value, bool requires_grad, Backward backward);

  const Matrix<T>& value(Id id) const;
  /// Gradient buffer of a node (zero-initialized on first access).
  Matrix<T>& grad(Id id);
  bool requires_grad(Id id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Id root);

  // Dropout settings for ops recorded on this tape.
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;

 private:
  struct Node {
    Matrix<T> own_value;
    const Matrix<T>* value = nullptr;
    Matrix<T> own_grad;
    Matrix<T>* grad = nullptr;
    bool requires_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, Id> param_ids_;
};

// ---------------------------------------------------------------------------
// Differentiable ops. All shapes are checked and violations throw ShapeError.

template <typename T>
int matmul(Tape<T>& t, int a, int b);
/// a * b^T
template <typename T>
int matmul_nt(Tape<T>& t, int a, int b);
/// x W + b; `bias` < 0 means no bias.
template <typename T>
int linear(Tape<T>& t, int x, int w, int bias);
template <typename T>
int add(Tape<T>& t, int a, int b);
/// Adds a [1 x n] row to every row of a.
template <typename T>
int add_row(Tape<T>& t, int a, int row);
template <typename T>
int scale(Tape<T>& t, int a, T s);
template <typename T>
int gelu(Tape<T>& t, int a);
template <typename T>
int layer_norm(Tape<T>& t, int x, int gamma, int beta);
template <typename T>
int attention(Tape<T>& t, int q, int k, int v, int heads, bool causal);
/// out[i] = table[indices[i]]
template <typename T>
int gather_rows(Tape<T>& t, int table, const std::vector<int>& indices);
template <typename T>
int concat_rows(Tape<T>& t, int a, int b);
/// Inverted dropout; identity unless the tape is in training mode.
template <typename T>
int dropout(Tape<T>& t, int a);
/// Mean negative log-softmax over rows with target >= 0 (others ignored).
template <typename T>
int cross_entropy(Tape<T>& t, int logits, const std::vector<int>& targets);
/// Averages child rows into `parent_count` parents.
template <typename T>
int mean_pool(Tape<T>& t, int x, const std::vector<int>& parent_of, int parent_count);
/// Neighbourhood unfolding for sparse convolution: row i becomes the
/// concatenation of x[neighbors[i][0..K)] (zeros where the index is -1).
template <typename T>
int im2col(Tape<T>& t, int x, const std::vector<int>& neighbors, int kernel_size);

}  // namespace polybuild::nn
