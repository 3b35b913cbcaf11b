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
#include <span>
#include <utility>
#include <vector>

#include "polybuild/geometry.hpp"

namespace polybuild::metrics {

inline constexpr std::size_t kSurfaceSamples = 10000;
inline constexpr int kEdgeSamples = 100;
inline constexpr double kMatchThreshold = 1.0;  // meters

/// Nearest-neighbour distance of every point of `a` within `b`, through the
/// active SIMD kernel.
std::vector<double> nearest_distances(std::span<const Vec3> a, std::span<const Vec3> b);

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);
double hausdorff(std::span<const Vec3> a, std::span<const Vec3> b);

/// O(|A||B|) references.
double chamfer_brute_force(std::span<const Vec3> a, std::span<const Vec3> b);
double hausdorff_brute_force(std::span<const Vec3> a, std::span<const Vec3> b);

/// One-sided mean distance from `n` samples of the ground-truth surface to
/// the predicted surface.
double mde(const PolyMesh& gt, const PolyMesh& pred, std::size_t n, std::uint64_t seed);

struct MatchReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double threshold = 0;
  std::vector<std::pair<int, int>> matches;  // (gt index, pred index)
};

/// Greedy one-to-one matching on a [gt x pred] distance table: pairs in
/// ascending distance (ties by gt, then pred index) are accepted when both
/// ends are free and the distance is below the threshold.
MatchReport greedy_match(const std::vector<std::vector<double>>& dist, std::size_t gt_count, std::size_t pred_count,
                         double threshold);

MatchReport vertex_prf(std::span<const Vec3> gt, std::span<const Vec3> pred, double threshold = kMatchThreshold);

/// Unique undirected edges over all faces, sorted.
std::vector<std::pair<int, int>> unique_edges(const PolyMesh& mesh);

/// RMS distance of `samples` evenly spaced order-aligned points, minimised
/// over reversing the second edge.
double edge_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1, int samples = kEdgeSamples);

MatchReport edge_prf(const PolyMesh& gt, const PolyMesh& pred, double threshold = kMatchThreshold,
                     int samples = kEdgeSamples);

struct CountErrors {
  double vertices = 0;
  double faces = 0;
  double edge_length = 0;  // meters
  double area = 0;         // square meters
};

double total_edge_length(const PolyMesh& mesh);
CountErrors count_errors(const PolyMesh& gt, const PolyMesh& pred);

/// All metrics of one building.
struct Evaluation {
  double chamfer = 0;
  double hausdorff = 0;
  double mde = 0;
  MatchReport vertex;
  MatchReport edge;
  CountErrors counts;
};

Evaluation evaluate(const PolyMesh& gt, const PolyMesh& pred, std::size_t samples, std::uint64_t seed,
                    double threshold = kMatchThreshold);

struct SweepRow {
  double threshold = 0;
  double vertex_f1 = 0;
  double edge_f1 = 0;
};

/// F1 against threshold.
std::vector<SweepRow> sweep(const PolyMesh& gt, const PolyMesh& pred, std::span<const double> thresholds);

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

/// Fixed-width bins from 0; the last bin also collects everything above.
std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width, int bins);

/// Axis-aligned bounding box mesh of a cloud (the trivial baseline).
PolyMesh bounding_box_mesh(const PointCloud& cloud);

}  // namespace polybuild::metrics
