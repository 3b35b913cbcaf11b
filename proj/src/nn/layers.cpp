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

#include "polybuild/nn/layers.hpp"

#include "polybuild/nn/functional.hpp"

namespace polybuild::nn {

template <typename T>
LinearLayer<T> LinearLayer<T>::create(ParamStore<T>& store, const std::string& name, int in, int out, Rng& rng,
                                      bool with_bias, double stddev) {
  LinearLayer l;
  l.weight = &store.add(name + ".weight", in, out, Init::kNormal, stddev, rng);
  if (with_bias) l.bias = &store.add(name + ".bias", 1, out, Init::kZeros, 0.0, rng);
  return l;
}

template <typename T>
int LinearLayer<T>::forward(Tape<T>& t, int x) const {
  return linear(t, x, t.param(*weight), bias ? t.param(*bias) : -1);
}

template <typename T>
Matrix<T> LinearLayer<T>::apply(const Matrix<T>& x) const {
  return functional::linear(x, weight->value, bias ? &bias->value : nullptr);
}

template <typename T>
LayerNormLayer<T> LayerNormLayer<T>::create(ParamStore<T>& store, const std::string& name, int width, Rng& rng) {
  LayerNormLayer l;
  l.gamma = &store.add(name + ".gamma", 1, width, Init::kOnes, 0.0, rng);
  l.beta = &store.add(name + ".beta", 1, width, Init::kZeros, 0.0, rng);
  return l;
}

template <typename T>
int LayerNormLayer<T>::forward(Tape<T>& t, int x) const {
  return layer_norm(t, x, t.param(*gamma), t.param(*beta));
}

template <typename T>
Matrix<T> LayerNormLayer<T>::apply(const Matrix<T>& x) const {
  return functional::layer_norm(x, gamma->value, beta->value);
}

template <typename T>
AttentionLayer<T> AttentionLayer<T>::create(ParamStore<T>& store, const std::string& name, int width, int heads,
                                            Rng& rng) {
  if (width % heads != 0) throw ShapeError("attention width not divisible by heads");
  AttentionLayer a;
  a.query = LinearLayer<T>::create(store, name + ".query", width, width, rng);
  a.key = LinearLayer<T>::create(store, name + ".key", width, width, rng);
  a.value = LinearLayer<T>::create(store, name + ".value", width, width, rng);
  a.out = LinearLayer<T>::create(store, name + ".out", width, width, rng);
  a.heads = heads;
  return a;
}

template <typename T>
int AttentionLayer<T>::forward(Tape<T>& t, int x, int source, bool causal) const {
  const int q = query.forward(t, x);
  const int k = key.forward(t, source);
  const int v = value.forward(t, source);
  return out.forward(t, attention(t, q, k, v, heads, causal));
}

template <typename T>
DecoderBlock<T> DecoderBlock<T>::create(ParamStore<T>& store, const std::string& name, const StackShape& shape,
                                        bool cross, Rng& rng) {
  DecoderBlock b;
  b.ln_self = LayerNormLayer<T>::create(store, name + ".ln_self", shape.width, rng);
  b.self_attn = AttentionLayer<T>::create(store, name + ".self_attn", shape.width, shape.heads, rng);
  b.has_cross = cross;
  if (cross) {
    b.ln_cross = LayerNormLayer<T>::create(store, name + ".ln_cross", shape.width, rng);
    b.cross_attn = AttentionLayer<T>::create(store, name + ".cross_attn", shape.width, shape.heads, rng);
  }
  b.ln_ff = LayerNormLayer<T>::create(store, name + ".ln_ff", shape.width, rng);
  b.ff_in = LinearLayer<T>::create(store, name + ".ff_in", shape.width, shape.ff, rng);
  b.ff_out = LinearLayer<T>::create(store, name + ".ff_out", shape.ff, shape.width, rng);
  return b;
}

template <typename T>
int DecoderBlock<T>::forward(Tape<T>& t, int x, int context, bool causal) const {
  int h = ln_self.forward(t, x);
  x = add(t, x, dropout(t, self_attn.forward(t, h, h, causal)));
  if (has_cross && context >= 0) {
    h = ln_cross.forward(t, x);
    x = add(t, x, dropout(t, cross_attn.forward(t, h, context, false)));
  }
  h = ln_ff.forward(t, x);
  h = ff_out.forward(t, gelu(t, ff_in.forward(t, h)));
  return add(t, x, dropout(t, h));
}

template <typename T>
TransformerStack<T> TransformerStack<T>::create(ParamStore<T>& store, const std::string& name,
                                                const StackShape& shape, bool causal, bool cross, Rng& rng) {
  TransformerStack s;
  s.shape = shape;
  s.causal = causal;
  s.cross = cross;
  for (int i = 0; i < shape.layers; ++i) {
    s.blocks.push_back(DecoderBlock<T>::create(store, name + ".block" + std::to_string(i), shape, cross, rng));
  }
  s.final_ln = LayerNormLayer<T>::create(store, name + ".ln_final", shape.width, rng);
  return s;
}

template <typename T>
int TransformerStack<T>::forward(Tape<T>& t, int x, int context) const {
  if (t.value(x).cols() != shape.width) throw ShapeError("stack input width " + t.value(x).shape_string());
  if (context >= 0 && t.value(context).cols() != shape.width) {
    throw ShapeError("stack context width " + t.value(context).shape_string());
  }
  for (const DecoderBlock<T>& b : blocks) x = b.forward(t, x, context, causal);
  return final_ln.forward(t, x);
}

template <typename T>
StackCache<T> TransformerStack<T>::start(const Matrix<T>* context) const {
  StackCache<T> cache;
  cache.keys.resize(blocks.size());
  cache.values.resize(blocks.size());
  if (context && cross) {
    for (const DecoderBlock<T>& b : blocks) {
      cache.ctx_keys.push_back(b.cross_attn.key.apply(*context));
      cache.ctx_values.push_back(b.cross_attn.value.apply(*context));
    }
  }
  return cache;
}

template <typename T>
Matrix<T> TransformerStack<T>::step(const Matrix<T>& row, StackCache<T>& cache) const {
  if (row.rows() != 1 || row.cols() != shape.width) throw ShapeError("step input " + row.shape_string());
  Matrix<T> x = row;
  auto add_inplace = [](Matrix<T>& dst, const Matrix<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
  };
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const DecoderBlock<T>& b = blocks[l];
    Matrix<T> h = b.ln_self.apply(x);
    cache.keys[l].append_rows(b.self_attn.key.apply(h));
    cache.values[l].append_rows(b.self_attn.value.apply(h));
    Matrix<T> a = functional::attention(b.self_attn.query.apply(h), cache.keys[l], cache.values[l],
                                        b.self_attn.heads, false);
    add_inplace(x, b.self_attn.out.apply(a));
    if (b.has_cross && !cache.ctx_keys.empty()) {
      h = b.ln_cross.apply(x);
      a = functional::attention(b.cross_attn.query.apply(h), cache.ctx_keys[l], cache.ctx_values[l],
                                b.cross_attn.heads, false);
      add_inplace(x, b.cross_attn.out.apply(a));
    }
    h = b.ff_in.apply(b.ln_ff.apply(x));
    functional::gelu_inplace(h);
    add_inplace(x, b.ff_out.apply(h));
  }
  ++cache.length;
  return final_ln.apply(x);
}

template struct LinearLayer<float>;
template struct LinearLayer<double>;
template struct LayerNormLayer<float>;
template struct LayerNormLayer<double>;
template struct AttentionLayer<float>;
template struct AttentionLayer<double>;
template struct DecoderBlock<float>;
template struct DecoderBlock<double>;
template struct TransformerStack<float>;
template struct TransformerStack<double>;

}  // namespace polybuild::nn
