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


#include "polybuild/models/vertex_model.hpp"

#include "polybuild/codec.hpp"

namespace polybuild::models {

template <typename T>
VertexModel<T> VertexModel<T>::create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  VertexModel m;
  m.cfg = cfg;
  m.encoder = PointEncoder<T>::create(store, "encoder", cfg, rng);
  m.coord = &store.add("vertex.coord", 3, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.position = &store.add("vertex.position", cfg.vertex_positions(), cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.value = &store.add("vertex.value", kVertexVocab, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.start = &store.add("vertex.start", 1, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.decoder = nn::TransformerStack<T>::create(store, "vertex.decoder", cfg.decoder_shape(), true, true, rng);
  m.head = nn::LinearLayer<T>::create(store, "vertex.head", cfg.width, kVertexVocab, rng);
  return m;
}

template <typename T>
int VertexModel<T>::embed_tokens(nn::Tape<T>& t, std::span<const int> tokens, int first) const {
  std::vector<int> coords, positions, values;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int pos = first + static_cast<int>(i);
    if (pos >= cfg.vertex_positions()) throw Error("sequence too long");
    if (tokens[i] < 0 || tokens[i] >= kVertexVocab) throw Error("vertex token out of range");
    coords.push_back(pos % 3);
    positions.push_back(pos);
    values.push_back(tokens[i]);
  }
  int e = nn::gather_rows(t, t.param(*coord), coords);
  e = nn::add(t, e, nn::gather_rows(t, t.param(*position), positions));
  return nn::add(t, e, nn::gather_rows(t, t.param(*value), values));
}

template <typename T>
int VertexModel<T>::logits(nn::Tape<T>& t, int context, std::span<const int> tokens) const {
  if (tokens.empty()) throw Error("empty vertex sequence");
  if (static_cast<int>(tokens.size()) > cfg.vertex_positions()) throw Error("sequence too long");
  int x = t.param(*start);
  if (tokens.size() > 1) x = nn::concat_rows(t, x, embed_tokens(t, tokens.first(tokens.size() - 1)));
  return head.forward(t, decoder.forward(t, x, context));
}

template <typename T>
int VertexModel<T>::loss(nn::Tape<T>& t, const EncoderPlan& plan, std::span<const int> tokens) const {
  const int ctx = encoder.forward(t, plan);
  const std::vector<int> targets(tokens.begin(), tokens.end());
  return nn::cross_entropy(t, logits(t, ctx, tokens), targets);
}

template struct VertexModel<float>;
template struct VertexModel<double>;

VertexDecoder::VertexDecoder(const VertexModel<float>& model, const nn::Matrix<float>& context)
    : model_(model), cache_(model.decoder.start(&context)), pending_(model.start->value) {}

const std::vector<float>& VertexDecoder::next_logits() {
  if (!fresh_) {
    const nn::Matrix<float> h = model_.decoder.step(pending_, cache_);
    logits_ = model_.head.apply(h).values();
    fresh_ = true;
  }
  return logits_;
}

void VertexDecoder::push(int token) {
  const int pos = length_;
  if (pos >= model_.cfg.vertex_positions()) throw Error("sequence too long");
  if (token < 0 || token >= kVertexVocab) throw Error("vertex token out of range");
  if (!fresh_) next_logits();
  const int w = model_.cfg.width;
  nn::Matrix<float> row(1, w);
  for (int j = 0; j < w; ++j) {
    row(0, j) = model_.coord->value(pos % 3, j) + model_.position->value(pos, j) + model_.value->value(token, j);
  }
  pending_ = std::move(row);
  fresh_ = false;
  ++length_;
}

}  // namespace polybuild::models
