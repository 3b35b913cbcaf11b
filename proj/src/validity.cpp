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


#include "polybuild/validity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace polybuild {
namespace {

struct P2 {
  double x, y;
};

using Polygon2 = std::vector<P2>;

bool inside(const Polygon2& poly, P2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const P2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x) in = !in;
    }
  }
  return in;
}

double segment_distance_sq(P2 p, P2 a, P2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len = dx * dx + dy * dy;
  double t = len > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
  return ex * ex + ey * ey;
}

bool near_polygon(const Polygon2& poly, P2 p, double buffer) {
  if (inside(poly, p)) return true;
  const double b2 = buffer * buffer;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if (segment_distance_sq(p, poly[j], poly[i]) <= b2) return true;
  }
  return false;
}

P2 lattice_xy(const IVec3& q) { return {q.x + 0.5, q.y + 0.5}; }

std::vector<P2> projected_cloud(const QuantizedMesh& mesh, const PointCloud& normalized) {
  std::vector<P2> out;
  out.reserve(normalized.size());
  for (const Vec3& p : normalized.points) {
    const Vec3 u = normalized_to_lattice(p, mesh.box);
    out.push_back({u.x, u.y});
  }
  return out;
}

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

const char* to_string(FloorCoverage c) {
  switch (c) {
    case FloorCoverage::kOk: return "ok";
    case FloorCoverage::kMissingFloorFaces: return "missing-floor-faces";
    case FloorCoverage::kMissingFloorVertices: return "missing-floor-vertices";
  }
  return "?";
}

const char* to_string(Validity v) {
  switch (v) {
    case Validity::kOk: return "ok";
    case Validity::kMissingFloorVertices: return "missing-floor-vertices";
    case Validity::kMissingFloorFaces: return "missing-floor-faces";
    case Validity::kFloorConnectivity: return "floor-connectivity";
    case Validity::kDiagonalWalls: return "diagonal-walls";
  }
  return "?";
}

double floor_coverage_fraction(const QuantizedMesh& mesh, const PointCloud& normalized, double buffer) {
  if (normalized.empty()) return 1.0;
  const std::vector<FaceClass> cls = classify_faces(mesh);
  std::vector<Polygon2> floors;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (cls[f] != FaceClass::kFloor) continue;
    Polygon2 poly;
    for (int v : mesh.faces[f]) poly.push_back(lattice_xy(mesh.vertices[v]));
    floors.push_back(std::move(poly));
  }
  std::size_t covered = 0;
  for (const P2& p : projected_cloud(mesh, normalized)) {
    for (const Polygon2& poly : floors) {
      if (near_polygon(poly, p, buffer)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(normalized.size());
}

FloorCoverage check_floor_coverage(const QuantizedMesh& mesh, const PointCloud& normalized) {
  if (floor_coverage_fraction(mesh, normalized) >= kCoverageFraction) return FloorCoverage::kOk;
  if (mesh.vertices.empty()) return FloorCoverage::kMissingFloorVertices;
  P2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const IVec3& q : mesh.vertices) {
    const P2 p = lattice_xy(q);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  std::size_t covered = 0;
  const std::vector<P2> pts = projected_cloud(mesh, normalized);
  for (const P2& p : pts) {
    const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
    const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
    if (dx * dx + dy * dy <= kCoverageBuffer * kCoverageBuffer) ++covered;
  }
  const double frac = static_cast<double>(covered) / static_cast<double>(pts.size());
  return frac >= kCoverageFraction ? FloorCoverage::kMissingFloorFaces : FloorCoverage::kMissingFloorVertices;
}

bool check_floor_wall_connectivity(const QuantizedMesh& mesh) {
  const std::vector<FaceClass> cls = classify_faces(mesh);
  std::map<std::pair<int, int>, int> floor_use;
  std::map<std::pair<int, int>, bool> wall_edge;
  bool any_floor = false;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (std::size_t i = 0; i < face.size(); ++i) {
      const auto e = edge_key(face[i], face[(i + 1) % face.size()]);
      if (cls[f] == FaceClass::kFloor) ++floor_use[e];
      if (cls[f] == FaceClass::kWall) wall_edge[e] = true;
    }
    any_floor |= cls[f] == FaceClass::kFloor;
  }
  if (!any_floor) return false;
  for (const auto& [e, uses] : floor_use) {
    if (uses == 1 && !wall_edge.count(e)) return false;
  }
  return true;
}

bool check_no_diagonal_wall_edges(const QuantizedMesh& mesh) {
  const std::vector<FaceClass> cls = classify_faces(mesh);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (cls[f] != FaceClass::kWall) continue;
    const Face& face = mesh.faces[f];
    for (std::size_t i = 0; i < face.size(); ++i) {
      const IVec3& a = mesh.vertices[face[i]];
      const IVec3& b = mesh.vertices[face[(i + 1) % face.size()]];
      const bool horizontal = a.z == b.z;
      const bool vertical = a.x == b.x && a.y == b.y;
      if (!horizontal && !vertical) return false;
    }
  }
  return true;
}

Validity check_mesh(const QuantizedMesh& mesh, const PointCloud& normalized) {
  switch (check_floor_coverage(mesh, normalized)) {
    case FloorCoverage::kMissingFloorVertices: return Validity::kMissingFloorVertices;
    case FloorCoverage::kMissingFloorFaces: return Validity::kMissingFloorFaces;
    case FloorCoverage::kOk: break;
  }
  if (!check_floor_wall_connectivity(mesh)) return Validity::kFloorConnectivity;
  if (!check_no_diagonal_wall_edges(mesh)) return Validity::kDiagonalWalls;
  return Validity::kOk;
}

}  // namespace polybuild
