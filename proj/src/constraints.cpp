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

#include "polybuild/constraints.hpp"

#include <algorithm>

namespace polybuild {

namespace {
constexpr int kMaxCoord = kLatticeSize - 1;
}

VertexDecodeState VertexDecodeState::replay(std::span<const int> tokens, std::size_t max_vertices) {
  VertexDecodeState s(max_vertices);
  for (int t : tokens) s.push(t);
  return s;
}

void VertexDecodeState::push(int token) {
  if (stopped_) throw Error("vertex stream already stopped");
  if (token == kVertexStop) {
    stopped_ = true;
    ++length_;
    return;
  }
  const int slot = next_slot();
  partial_[slot] = token;
  ++length_;
  if (slot == 2) last_ = IVec3{partial_[2], partial_[1], partial_[0]};
}

TokenMask vertex_mask(const VertexDecodeState& state) {
  TokenMask mask(kVertexVocab, 0);
  if (state.stopped()) return mask;
  const auto& prev = state.last_vertex();
  switch (state.next_slot()) {
    case 0: {
      mask[kVertexStop] = state.completed_vertices() >= 1;
      if (state.completed_vertices() >= state.max_vertices()) break;
      int lo = 0;
      if (prev) {
        // Repeating z needs room for a larger (y, x) pair.
        lo = (prev->y == kMaxCoord && prev->x == kMaxCoord) ? prev->z + 1 : prev->z;
      }
      for (int t = lo; t <= kMaxCoord; ++t) mask[t] = 1;
      break;
    }
    case 1: {
      int lo = 0;
      if (prev && state.partial_z() == prev->z) lo = prev->x == kMaxCoord ? prev->y + 1 : prev->y;
      for (int t = lo; t <= kMaxCoord; ++t) mask[t] = 1;
      break;
    }
    case 2: {
      int lo = 0;
      if (prev && state.partial_z() == prev->z && state.partial_y() == prev->y) lo = prev->x + 1;
      for (int t = lo; t <= kMaxCoord; ++t) mask[t] = 1;
      break;
    }
  }
  return mask;
}

FaceDecodeState::FaceDecodeState(std::size_t vertex_count, std::size_t max_faces, std::size_t max_face_size)
    : vertex_count_(vertex_count),
      max_faces_(max_faces),
      max_face_size_(max_face_size == 0 ? vertex_count : max_face_size),
      used_(vertex_count, 0) {}

FaceDecodeState FaceDecodeState::replay(std::span<const int> tokens, std::size_t vertex_count,
                                        std::size_t max_faces, std::size_t max_face_size) {
  FaceDecodeState s(vertex_count, max_faces, max_face_size);
  for (int t : tokens) s.push(t);
  return s;
}

void FaceDecodeState::push(int token) {
  if (stopped_) throw Error("face stream already stopped");
  if (token == kFaceStop) {
    stopped_ = true;
    return;
  }
  if (token == kFaceEnd) {
    previous_first_ = current_.empty() ? previous_first_ : current_.front();
    for (int idx : current_) used_[idx] = 0;
    current_.clear();
    ++completed_;
    return;
  }
  const int idx = token - kFaceIndexOffset;
  if (idx < 0 || static_cast<std::size_t>(idx) >= vertex_count_) throw Error("face token out of range");
  current_.push_back(idx);
  used_[idx] = 1;
}

TokenMask face_mask(const FaceDecodeState& state) {
  const std::size_t n = state.vertex_count();
  TokenMask mask(n + kFaceIndexOffset, 0);
  if (state.stopped()) return mask;
  const Face& cur = state.current_face();
  if (cur.empty()) {
    mask[kFaceStop] = state.completed_faces() >= 1;
    if (state.completed_faces() >= state.max_faces()) return mask;
    // A new face needs two more indices above its first one.
    const int lo = std::max(state.previous_first(), 0);
    for (int i = lo; i + 2 < static_cast<int>(n); ++i) mask[i + kFaceIndexOffset] = 1;
    return mask;
  }
  mask[kFaceEnd] = cur.size() >= 3;
  if (cur.size() >= state.max_face_size()) return mask;
  const int first = cur.front();
  // Build a quick membership test for the open face.
  std::vector<std::uint8_t> in_face(n, 0);
  for (int idx : cur) in_face[idx] = 1;
  for (int i = first + 1; i < static_cast<int>(n); ++i) {
    if (!in_face[i]) mask[i + kFaceIndexOffset] = 1;
  }
  return mask;
}

bool any_valid(std::span<const std::uint8_t> mask) {
  return std::any_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

std::vector<double> redistribute(std::span<const double> probs, std::span<const std::uint8_t> mask,
                                 Redistribution mode) {
  if (probs.size() != mask.size()) throw Error("redistribute: size mismatch");
  double masked = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) {
      ++valid;
    } else {
      masked += probs[i];
    }
  }
  if (valid == 0) throw Error("dead end");

  std::vector<double> out(probs.size(), 0.0);
  const double kept = 1.0 - masked;
  if (mode == Redistribution::kProportional && kept > 0.0) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (mask[i]) out[i] = probs[i] / kept;
    }
    return out;
  }
  const double share = masked / static_cast<double>(valid);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) out[i] = probs[i] + share;
  }
  return out;
}

}  // namespace polybuild
