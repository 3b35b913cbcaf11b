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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polybuild/codec.hpp"

namespace polybuild {

/// One byte per token id; nonzero means the token may be emitted next.
using TokenMask = std::vector<std::uint8_t>;

/// Decoding state of a vertex stream. Everything is derived from the tokens
/// pushed so far, so a state can always be rebuilt by replaying a prefix.
class VertexDecodeState {
 public:
  explicit VertexDecodeState(std::size_t max_vertices = kMaxVertices) : max_vertices_(max_vertices) {}
  static VertexDecodeState replay(std::span<const int> tokens, std::size_t max_vertices = kMaxVertices);

  void push(int token);

  std::size_t length() const { return length_; }
  /// 0 = z, 1 = y, 2 = x of the triple being emitted.
  int next_slot() const { return static_cast<int>(length_ % 3); }
  std::size_t completed_vertices() const { return length_ / 3; }
  bool stopped() const { return stopped_; }
  const std::optional<IVec3>& last_vertex() const { return last_; }
  std::size_t max_vertices() const { return max_vertices_; }
  /// Partial (z, y) of the triple in progress; valid for slots 1 and 2.
  int partial_z() const { return partial_[0]; }
  int partial_y() const { return partial_[1]; }

 private:
  std::size_t max_vertices_;
  std::size_t length_ = 0;
  bool stopped_ = false;
  std::optional<IVec3> last_;
  int partial_[3] = {0, 0, 0};
};

/// Decoding state of a face stream over a fixed vertex set.
class FaceDecodeState {
 public:
  FaceDecodeState(std::size_t vertex_count, std::size_t max_faces = kMaxFaces, std::size_t max_face_size = 0);
  static FaceDecodeState replay(std::span<const int> tokens, std::size_t vertex_count,
                                std::size_t max_faces = kMaxFaces, std::size_t max_face_size = 0);

  void push(int token);

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t completed_faces() const { return completed_; }
  const Face& current_face() const { return current_; }
  /// First index of the last completed face, or -1.
  int previous_first() const { return previous_first_; }
  bool stopped() const { return stopped_; }
  std::size_t max_face_size() const { return max_face_size_; }
  std::size_t max_faces() const { return max_faces_; }

 private:
  std::size_t vertex_count_;
  std::size_t max_faces_;
  std::size_t max_face_size_;
  std::size_t completed_ = 0;
  int previous_first_ = -1;
  bool stopped_ = false;
  Face current_;
  std::vector<std::uint8_t> used_;
};

/// Mask over the 257 vertex tokens. Besides the ordering rules, choices that
/// can no longer be completed (e.g. repeating z when the previous vertex was
/// (z, 255, 255)) are excluded, so masked rollouts never reach a dead end.
TokenMask vertex_mask(const VertexDecodeState& state);

/// Mask over vertex_count + 2 face tokens.
TokenMask face_mask(const FaceDecodeState& state);

enum class Redistribution { kEven, kProportional };

/// Zeroes masked entries and hands their mass to the valid ones: evenly
/// (p + M/K) or proportionally (p / (1 - M)). Throws Error("dead end") when
/// nothing is valid.
std::vector<double> redistribute(std::span<const double> probs, std::span<const std::uint8_t> mask,
                                 Redistribution mode = Redistribution::kEven);

bool any_valid(std::span<const std::uint8_t> mask);

}  // namespace polybuild
