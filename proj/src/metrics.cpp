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


#include "polybuild/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "polybuild/random.hpp"
#include "polybuild/simd/kernels.hpp"

namespace polybuild::metrics {
namespace {

void require_nonempty(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error("empty point set");
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double brute_nearest(const Vec3& p, std::span<const Vec3> b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& q : b) best = std::min(best, squared_distance(q, p));
  return std::sqrt(best);
}

MatchReport finish(MatchReport r, std::size_t gt_count, std::size_t pred_count) {
  const double m = static_cast<double>(r.matches.size());
  r.precision = pred_count ? m / static_cast<double>(pred_count) : 0.0;
  r.recall = gt_count ? m / static_cast<double>(gt_count) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace

std::vector<double> nearest_distances(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  std::vector<double> xs(b.size()), ys(b.size()), zs(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    xs[i] = b[i].x;
    ys[i] = b[i].y;
    zs[i] = b[i].z;
  }
  const simd::KernelTable& k = simd::kernels();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::sqrt(k.min_sq_dist(xs.data(), ys.data(), zs.data(), b.size(), a[i].x, a[i].y, a[i].z, nullptr));
  }
  return out;
}

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  return mean(nearest_distances(a, b)) + mean(nearest_distances(b, a));
}

double hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
  const std::vector<double> ab = nearest_distances(a, b);
  const std::vector<double> ba = nearest_distances(b, a);
  return std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
}

double chamfer_brute_force(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  std::vector<double> ab, ba;
  for (const Vec3& p : a) ab.push_back(brute_nearest(p, b));
  for (const Vec3& p : b) ba.push_back(brute_nearest(p, a));
  return mean(ab) + mean(ba);
}

double hausdorff_brute_force(std::span<const Vec3> a, std::span<const Vec3> b) {
  require_nonempty(a, b);
  double h = 0.0;
  for (const Vec3& p : a) h = std::max(h, brute_nearest(p, b));
  for (const Vec3& p : b) h = std::max(h, brute_nearest(p, a));
  return h;
}

double mde(const PolyMesh& gt, const PolyMesh& pred, std::size_t n, std::uint64_t seed) {
  if (gt.faces.empty() || pred.faces.empty()) throw Error("empty mesh");
  const PointCloud samples = sample_surface(gt, n, seed);
  if (samples.empty()) throw Error("mde: no samples");
  double s = 0.0;
  for (const Vec3& p : samples.points) s += point_to_mesh_distance(p, pred);
  return s / static_cast<double>(samples.size());
}

MatchReport greedy_match(const std::vector<std::vector<double>>& dist, std::size_t gt_count, std::size_t pred_count,
                         double threshold) {
  std::vector<std::tuple<double, int, int>> pairs;
  for (std::size_t i = 0; i < gt_count; ++i) {
    for (std::size_t j = 0; j < pred_count; ++j) {
      if (dist[i][j] < threshold) pairs.emplace_back(dist[i][j], static_cast<int>(i), static_cast<int>(j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> gt_used(gt_count, 0), pred_used(pred_count, 0);
  MatchReport r;
  r.threshold = threshold;
  for (const auto& [d, i, j] : pairs) {
    if (gt_used[i] || pred_used[j]) continue;
    gt_used[i] = pred_used[j] = 1;
    r.matches.emplace_back(i, j);
  }
  return finish(std::move(r), gt_count, pred_count);
}

MatchReport vertex_prf(std::span<const Vec3> gt, std::span<const Vec3> pred, double threshold) {
  std::vector<std::vector<double>> dist(gt.size(), std::vector<double>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) dist[i][j] = distance(gt[i], pred[j]);
  }
  return greedy_match(dist, gt.size(), pred.size(), threshold);
}

std::vector<std::pair<int, int>> unique_edges(const PolyMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const Face& f : mesh.faces) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int a = f[i], b = f[(i + 1) % f.size()];
      edges.insert(a < b ? std::pair{a, b} : std::pair{b, a});
    }
  }
  return {edges.begin(), edges.end()};
}

double edge_distance(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1, int samples) {
  if (samples < 2) throw Error("edge_distance: need at least 2 samples");
  double fwd = 0.0, rev = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    const Vec3 p = a0 + (a1 - a0) * t;
    const Vec3 q = b0 + (b1 - b0) * t;
    const Vec3 r = b1 + (b0 - b1) * t;
    fwd += squared_distance(p, q);
    rev += squared_distance(p, r);
  }
  return std::sqrt(std::min(fwd, rev) / samples);
}

MatchReport edge_prf(const PolyMesh& gt, const PolyMesh& pred, double threshold, int samples) {
  const auto ge = unique_edges(gt);
  const auto pe = unique_edges(pred);
  std::vector<std::vector<double>> dist(ge.size(), std::vector<double>(pe.size()));
  for (std::size_t i = 0; i < ge.size(); ++i) {
    for (std::size_t j = 0; j < pe.size(); ++j) {
      dist[i][j] = edge_distance(gt.vertices[ge[i].first], gt.vertices[ge[i].second], pred.vertices[pe[j].first],
                                 pred.vertices[pe[j].second], samples);
    }
  }
  return greedy_match(dist, ge.size(), pe.size(), threshold);
}

double total_edge_length(const PolyMesh& mesh) {
  double s = 0.0;
  for (const auto& [a, b] : unique_edges(mesh)) s += distance(mesh.vertices[a], mesh.vertices[b]);
  return s;
}

CountErrors count_errors(const PolyMesh& gt, const PolyMesh& pred) {
  CountErrors c;
  c.vertices = std::abs(static_cast<double>(gt.vertices.size()) - static_cast<double>(pred.vertices.size()));
  c.faces = std::abs(static_cast<double>(gt.faces.size()) - static_cast<double>(pred.faces.size()));
  c.edge_length = std::abs(total_edge_length(gt) - total_edge_length(pred));
  c.area = std::abs(surface_area(gt) - surface_area(pred));
  return c;
}

Evaluation evaluate(const PolyMesh& gt, const PolyMesh& pred, std::size_t samples, std::uint64_t seed,
                    double threshold) {
  Evaluation e;
  const PointCloud a = sample_surface(gt, samples, derive_seed(seed, 0));
  const PointCloud b = sample_surface(pred, samples, derive_seed(seed, 0));
  e.chamfer = chamfer(a.points, b.points);
  e.hausdorff = hausdorff(a.points, b.points);
  e.mde = mde(gt, pred, samples, derive_seed(seed, 2));
  e.vertex = vertex_prf(gt.vertices, pred.vertices, threshold);
  e.edge = edge_prf(gt, pred, threshold);
  e.counts = count_errors(gt, pred);
  return e;
}

std::vector<SweepRow> sweep(const PolyMesh& gt, const PolyMesh& pred, std::span<const double> thresholds) {
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    rows.push_back({t, vertex_prf(gt.vertices, pred.vertices, t).f1, edge_prf(gt, pred, t).f1});
  }
  return rows;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double bin_width, int bins) {
  if (bin_width <= 0 || bins < 1) throw Error("histogram: bad bins");
  std::vector<HistogramBin> out(bins);
  for (int b = 0; b < bins; ++b) out[b] = {b * bin_width, (b + 1) * bin_width, 0};
  for (double v : values) {
    const int b = std::clamp(static_cast<int>(std::floor(v / bin_width)), 0, bins - 1);
    ++out[b].count;
  }
  return out;
}

PolyMesh bounding_box_mesh(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("empty input");
  Vec3 lo = cloud.points.front(), hi = lo;
  for (const Vec3& p : cloud.points) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  PolyMesh m;
  for (int k = 0; k < 8; ++k) {
    m.vertices.push_back({(k & 1) ? hi.x : lo.x, (k & 2) ? hi.y : lo.y, (k & 4) ? hi.z : lo.z});
  }
  m.faces = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  return m;
}

}  // namespace polybuild::metrics
