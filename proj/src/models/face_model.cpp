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


#include "polybuild/models/face_model.hpp"

#include <algorithm>
#include <cmath>

#include "polybuild/codec.hpp"
#include "polybuild/nn/functional.hpp"

namespace polybuild::models {

FacePositions face_positions(std::span<const int> tokens, int max_faces, int max_face_size) {
  FacePositions p;
  int face = 0, slot = 0;
  for (int tok : tokens) {
    p.face.push_back(std::min(face, max_faces));
    p.slot.push_back(std::min(slot, max_face_size));
    if (tok == kFaceEnd) {
      ++face;
      slot = 0;
    } else if (tok != kFaceStop) {
      ++slot;
    }
  }
  return p;
}

template <typename T>
FaceModel<T> FaceModel<T>::create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  FaceModel m;
  m.cfg = cfg;
  const char* axes[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    m.axis_value[a] = &store.add(std::string("face.value_") + axes[a], kLatticeSize, cfg.width, nn::Init::kNormal,
                                 nn::kInitStd, rng);
  }
  if (cfg.vertex_list_positions) {
    m.list_position = &store.add("face.list_position", cfg.max_vertices, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  }
  m.vertex_encoder =
      nn::TransformerStack<T>::create(store, "face.vertex_encoder", cfg.face_encoder_shape(), false, false, rng);
  m.face_id = &store.add("face.face_id", cfg.max_faces + 1, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.slot = &store.add("face.slot", cfg.max_face_size + 1, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.special = &store.add("face.special", 2, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.start = &store.add("face.start", 1, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  m.decoder = nn::TransformerStack<T>::create(store, "face.decoder", cfg.decoder_shape(), true, true, rng);
  m.pointer = nn::LinearLayer<T>::create(store, "face.pointer", cfg.width, cfg.width, rng);
  m.keys = &store.add("face.keys", 2, cfg.width, nn::Init::kNormal, nn::kInitStd, rng);
  return m;
}

template <typename T>
int FaceModel<T>::encode_vertices(nn::Tape<T>& t, const std::vector<IVec3>& vertices) const {
  if (vertices.empty()) throw Error("empty vertex list");
  if (static_cast<int>(vertices.size()) > cfg.max_vertices) throw Error("too many vertices for the face model");
  std::array<std::vector<int>, 3> idx;
  std::vector<int> order;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      if (vertices[i][a] < 0 || vertices[i][a] >= kLatticeSize) throw Error("vertex coordinate outside lattice");
      idx[a].push_back(vertices[i][a]);
    }
    order.push_back(static_cast<int>(i));
  }
  int e = nn::gather_rows(t, t.param(*axis_value[0]), idx[0]);
  e = nn::add(t, e, nn::gather_rows(t, t.param(*axis_value[1]), idx[1]));
  e = nn::add(t, e, nn::gather_rows(t, t.param(*axis_value[2]), idx[2]));
  if (list_position) e = nn::add(t, e, nn::gather_rows(t, t.param(*list_position), order));
  return vertex_encoder.forward(t, e, -1);
}

template <typename T>
int FaceModel<T>::embed_tokens(nn::Tape<T>& t, int encoded, std::span<const int> tokens) const {
  const int targets = t.value(encoded).rows() + kFaceIndexOffset;
  for (int tok : tokens) {
    if (tok < 0 || tok >= targets) throw Error("face token " + std::to_string(tok) + " out of range");
  }
  const FacePositions pos = face_positions(tokens, cfg.max_faces, cfg.max_face_size);
  const std::vector<int> gather(tokens.begin(), tokens.end());
  int e = nn::gather_rows(t, nn::concat_rows(t, t.param(*special), encoded), gather);
  e = nn::add(t, e, nn::gather_rows(t, t.param(*face_id), pos.face));
  return nn::add(t, e, nn::gather_rows(t, t.param(*slot), pos.slot));
}

template <typename T>
int FaceModel<T>::logits(nn::Tape<T>& t, int encoded, std::span<const int> tokens) const {
  if (tokens.empty()) throw Error("empty face sequence");
  int x = t.param(*start);
  if (tokens.size() > 1) x = nn::concat_rows(t, x, embed_tokens(t, encoded, tokens.first(tokens.size() - 1)));
  const int h = decoder.forward(t, x, encoded);
  const int p = pointer.forward(t, h);
  const int k = nn::concat_rows(t, t.param(*keys), encoded);
  return nn::scale(t, nn::matmul_nt(t, p, k), static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg.width))));
}

template <typename T>
int FaceModel<T>::loss(nn::Tape<T>& t, const std::vector<IVec3>& vertices, std::span<const int> tokens) const {
  const int r = encode_vertices(t, vertices);
  const std::vector<int> targets(tokens.begin(), tokens.end());
  return nn::cross_entropy(t, logits(t, r, tokens), targets);
}

template struct FaceModel<float>;
template struct FaceModel<double>;

FaceDecoder::FaceDecoder(const FaceModel<float>& model, const std::vector<IVec3>& vertices) : model_(model) {
  nn::Tape<float> tape;
  encoded_ = tape.value(model.encode_vertices(tape, vertices));
  keys_ = model.keys->value;
  keys_.append_rows(encoded_);
  cache_ = model.decoder.start(&encoded_);
  pending_ = model.start->value;
}

const std::vector<float>& FaceDecoder::next_logits() {
  if (!fresh_) {
    const nn::Matrix<float> p = model_.pointer.apply(model_.decoder.step(pending_, cache_));
    nn::Matrix<float> scores;
    nn::gemm(false, true, p, keys_, scores, false);
    const float s = static_cast<float>(1.0 / std::sqrt(static_cast<double>(model_.cfg.width)));
    logits_.assign(scores.values().begin(), scores.values().end());
    for (float& v : logits_) v *= s;
    fresh_ = true;
  }
  return logits_;
}

void FaceDecoder::push(int token) {
  const int targets = encoded_.rows() + kFaceIndexOffset;
  if (token < 0 || token >= targets) throw Error("face token " + std::to_string(token) + " out of range");
  if (!fresh_) next_logits();
  const int w = model_.cfg.width;
  const int f = std::min(face_, model_.cfg.max_faces);
  const int s = std::min(slot_, model_.cfg.max_face_size);
  nn::Matrix<float> row(1, w);
  for (int j = 0; j < w; ++j) {
    const float base = token < kFaceIndexOffset ? model_.special->value(token, j)
                                                : encoded_(token - kFaceIndexOffset, j);
    row(0, j) = (base + model_.face_id->value(f, j)) + model_.slot->value(s, j);
  }
  if (token == kFaceEnd) {
    ++face_;
    slot_ = 0;
  } else if (token != kFaceStop) {
    ++slot_;
  }
  pending_ = std::move(row);
  fresh_ = false;
}

}  // namespace polybuild::models
