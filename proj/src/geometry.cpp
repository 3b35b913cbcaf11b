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

#include "polybuild/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "polybuild/random.hpp"

namespace polybuild {

namespace {

void validate_faces(const std::vector<Face>& faces, std::size_t vertex_count) {
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    if (face.size() < 3) {
      throw Error("face " + std::to_string(f) + " has " + std::to_string(face.size()) + " vertices");
    }
    for (std::size_t i = 0; i < face.size(); ++i) {
      if (face[i] < 0 || static_cast<std::size_t>(face[i]) >= vertex_count) {
        throw Error("face " + std::to_string(f) + " references vertex " + std::to_string(face[i]) +
                    " of " + std::to_string(vertex_count));
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (face[i] == face[j]) {
          throw Error("face " + std::to_string(f) + " repeats vertex " + std::to_string(face[i]));
        }
      }
    }
  }
}

int lattice_key(const IVec3& q) { return (q.z << 16) | (q.y << 8) | q.x; }

// Removes cyclically repeated corners and any later repeats of an index.
Face collapse_face(const Face& face) {
  Face out;
  out.reserve(face.size());
  for (int idx : face) {
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
  return out;
}

}  // namespace

void PolyMesh::validate() const { validate_faces(faces, vertices.size()); }

void QuantizedMesh::validate() const {
  for (const IVec3& q : vertices) {
    for (int a = 0; a < 3; ++a) {
      if (q[a] < 0 || q[a] >= kLatticeSize) throw Error("lattice coordinate out of range");
    }
  }
  validate_faces(faces, vertices.size());
}

double LatticeBox::extent(int axis) const {
  const double e = hi[axis] - lo[axis];
  return e > 1e-12 ? e : 1.0;
}

std::pair<PointCloud, NormTransform> normalize(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("empty input");
  Vec3 centroid;
  for (const Vec3& p : cloud.points) centroid += p;
  centroid = centroid * (1.0 / static_cast<double>(cloud.size()));

  double radius = 0.0;
  for (const Vec3& p : cloud.points) radius = std::max(radius, distance(p, centroid));

  NormTransform t;
  t.translation = centroid * -1.0;
  t.scale = radius > 0.0 ? 1.0 / radius : 1.0;

  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  return {std::move(out), t};
}

LatticeBox bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("empty input");
  LatticeBox box{cloud.points.front(), cloud.points.front()};
  for (const Vec3& p : cloud.points) {
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], p[a]);
      box.hi[a] = std::max(box.hi[a], p[a]);
    }
  }
  return box;
}

int quantize_coordinate(double value, double lo, double extent) {
  const double cell = std::floor((value - lo) / extent * kLatticeSize);
  return static_cast<int>(std::clamp(cell, 0.0, static_cast<double>(kLatticeSize - 1)));
}

QuantizedMesh quantize(const PolyMesh& mesh, const PointCloud& cloud) {
  auto [normalized, transform] = normalize(cloud);
  return quantize(mesh, transform, bounding_box(normalized));
}

QuantizedMesh quantize(const PolyMesh& mesh, const NormTransform& transform, const LatticeBox& box) {
  mesh.validate();
  QuantizedMesh out;
  out.transform = transform;
  out.box = box;

  std::unordered_map<int, int> merged;
  std::vector<int> remap(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 p = transform.apply(mesh.vertices[i]);
    IVec3 q{quantize_coordinate(p.x, box.lo.x, box.extent(0)),
            quantize_coordinate(p.y, box.lo.y, box.extent(1)),
            quantize_coordinate(p.z, box.lo.z, box.extent(2))};
    auto [it, inserted] = merged.try_emplace(lattice_key(q), static_cast<int>(out.vertices.size()));
    if (inserted) out.vertices.push_back(q);
    remap[i] = it->second;
  }

  for (const Face& face : mesh.faces) {
    Face mapped;
    mapped.reserve(face.size());
    for (int idx : face) mapped.push_back(remap[idx]);
    mapped = collapse_face(mapped);
    if (mapped.size() >= 3) out.faces.push_back(std::move(mapped));
  }
  return out;
}

Vec3 lattice_to_normalized(const IVec3& q, const LatticeBox& box) {
  Vec3 p;
  for (int a = 0; a < 3; ++a) {
    p[a] = box.lo[a] + (q[a] + 0.5) / kLatticeSize * box.extent(a);
  }
  return p;
}

Vec3 normalized_to_lattice(const Vec3& p, const LatticeBox& box) {
  Vec3 u;
  for (int a = 0; a < 3; ++a) u[a] = (p[a] - box.lo[a]) / box.extent(a) * kLatticeSize;
  return u;
}

PolyMesh dequantize(const QuantizedMesh& mesh) {
  PolyMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const IVec3& q : mesh.vertices) {
    out.vertices.push_back(mesh.transform.invert(lattice_to_normalized(q, mesh.box)));
  }
  out.faces = mesh.faces;
  return out;
}

QuantizedMesh canonicalize(const QuantizedMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return zyx_less(mesh.vertices[a], mesh.vertices[b]); });

  QuantizedMesh out;
  out.transform = mesh.transform;
  out.box = mesh.box;
  std::vector<int> new_index(n);
  out.vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    new_index[order[i]] = static_cast<int>(i);
    out.vertices.push_back(mesh.vertices[order[i]]);
  }

  out.faces.reserve(mesh.faces.size());
  for (const Face& face : mesh.faces) {
    Face f;
    f.reserve(face.size());
    for (int idx : face) f.push_back(new_index[idx]);
    std::rotate(f.begin(), std::min_element(f.begin(), f.end()), f.end());
    out.faces.push_back(std::move(f));
  }
  std::sort(out.faces.begin(), out.faces.end());
  return out;
}

bool is_canonical(const QuantizedMesh& mesh) {
  for (std::size_t i = 1; i < mesh.vertices.size(); ++i) {
    if (!zyx_less(mesh.vertices[i - 1], mesh.vertices[i])) return false;
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    if (face.empty() || *std::min_element(face.begin(), face.end()) != face.front()) return false;
    if (f > 0 && face < mesh.faces[f - 1]) return false;
  }
  return true;
}

double face_area(const PolyMesh& mesh, const Face& face) {
  double area = 0.0;
  const Vec3& a = mesh.vertices[face[0]];
  for (std::size_t i = 1; i + 1 < face.size(); ++i) {
    area += 0.5 * norm(cross(mesh.vertices[face[i]] - a, mesh.vertices[face[i + 1]] - a));
  }
  return area;
}

double surface_area(const PolyMesh& mesh) {
  double total = 0.0;
  for (const Face& f : mesh.faces) total += face_area(mesh, f);
  return total;
}

PointCloud sample_surface(const PolyMesh& mesh, std::size_t n, std::uint64_t seed) {
  PointCloud out;
  if (n == 0) return out;

  struct Tri {
    Vec3 a, b, c;
  };
  std::vector<Tri> tris;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Face& face : mesh.faces) {
    const Vec3& a = mesh.vertices[face[0]];
    for (std::size_t i = 1; i + 1 < face.size(); ++i) {
      const Vec3& b = mesh.vertices[face[i]];
      const Vec3& c = mesh.vertices[face[i + 1]];
      const double area = 0.5 * norm(cross(b - a, c - a));
      if (area <= 0.0) continue;
      total += area;
      tris.push_back({a, b, c});
      cumulative.push_back(total);
    }
  }
  if (tris.empty()) throw Error("mesh has no face with positive area");

  Rng rng(seed);
  out.points.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = uniform01(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t t = std::min<std::size_t>(it - cumulative.begin(), tris.size() - 1);
    const double r1 = std::sqrt(uniform01(rng));
    const double r2 = uniform01(rng);
    const Tri& tri = tris[t];
    out.points.push_back(tri.a * (1.0 - r1) + tri.b * (r1 * (1.0 - r2)) + tri.c * (r1 * r2));
  }
  return out;
}

namespace {

Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

}  // namespace

// Region-based closest point (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  if (norm(cross(ab, ac)) <= 1e-300) {
    Vec3 best = closest_point_on_segment(p, a, b);
    for (const Vec3& cand : {closest_point_on_segment(p, b, c), closest_point_on_segment(p, c, a)}) {
      if (squared_distance(p, cand) < squared_distance(p, best)) best = cand;
    }
    return best;
  }

  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_to_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return distance(p, closest_point_on_triangle(p, a, b, c));
}

double point_to_mesh_distance(const Vec3& p, const PolyMesh& mesh) {
  if (mesh.faces.empty()) throw Error("mesh has no faces");
  double best = std::numeric_limits<double>::infinity();
  for (const Face& face : mesh.faces) {
    const Vec3& a = mesh.vertices[face[0]];
    for (std::size_t i = 1; i + 1 < face.size(); ++i) {
      const Vec3 q = closest_point_on_triangle(p, a, mesh.vertices[face[i]], mesh.vertices[face[i + 1]]);
      best = std::min(best, squared_distance(p, q));
    }
  }
  return std::sqrt(best);
}

const char* to_string(FaceClass c) {
  switch (c) {
    case FaceClass::kFloor:
      return "floor";
    case FaceClass::kWall:
      return "wall";
    case FaceClass::kRoof:
      return "roof";
    case FaceClass::kOther:
      return "other";
  }
  return "other";
}

Vec3 newell_normal(std::span<const Vec3> polygon) {
  Vec3 n;
  const std::size_t k = polygon.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& cur = polygon[i];
    const Vec3& nxt = polygon[(i + 1) % k];
    n.x += (cur.y - nxt.y) * (cur.z + nxt.z);
    n.y += (cur.z - nxt.z) * (cur.x + nxt.x);
    n.z += (cur.x - nxt.x) * (cur.y + nxt.y);
  }
  return n;
}

FaceGeometry face_geometry(const QuantizedMesh& mesh, const Face& face) {
  std::vector<Vec3> poly;
  poly.reserve(face.size());
  Vec3 centroid;
  for (int idx : face) {
    const IVec3& q = mesh.vertices[idx];
    poly.push_back({static_cast<double>(q.x), static_cast<double>(q.y), static_cast<double>(q.z)});
    centroid += poly.back();
  }
  centroid = centroid * (1.0 / static_cast<double>(poly.size()));

  FaceGeometry g;
  const Vec3 n = newell_normal(poly);
  const double len = norm(n);
  g.area = 0.5 * len;
  if (len < 1e-9) return g;
  g.degenerate = false;
  g.unit_normal = n * (1.0 / len);
  for (const Vec3& v : poly) {
    g.planarity_residual = std::max(g.planarity_residual, std::abs(dot(v - centroid, g.unit_normal)));
  }
  return g;
}

std::vector<FaceClass> classify_faces(const QuantizedMesh& mesh) {
  const double cos_tol = std::cos(ClassifyTolerance::kAngleDeg * std::numbers::pi / 180.0);
  const double sin_tol = std::sin(ClassifyTolerance::kAngleDeg * std::numbers::pi / 180.0);

  std::vector<FaceGeometry> geo;
  geo.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces) geo.push_back(face_geometry(mesh, f));

  auto usable = [&](std::size_t f) {
    return !geo[f].degenerate && geo[f].planarity_residual < ClassifyTolerance::kPlanarity;
  };

  int min_down_z = std::numeric_limits<int>::max();
  int min_z = std::numeric_limits<int>::max();
  for (const IVec3& q : mesh.vertices) min_z = std::min(min_z, q.z);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!usable(f) || geo[f].unit_normal.z > -cos_tol) continue;
    for (int idx : mesh.faces[f]) min_down_z = std::min(min_down_z, mesh.vertices[idx].z);
  }

  std::vector<FaceClass> out(mesh.faces.size(), FaceClass::kOther);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!usable(f)) continue;
    const double nz = geo[f].unit_normal.z;
    int face_min_z = std::numeric_limits<int>::max();
    int face_max_z = std::numeric_limits<int>::min();
    for (int idx : mesh.faces[f]) {
      face_min_z = std::min(face_min_z, mesh.vertices[idx].z);
      face_max_z = std::max(face_max_z, mesh.vertices[idx].z);
    }
    if (nz <= -cos_tol && face_max_z - min_down_z <= ClassifyTolerance::kFloorHeight) {
      out[f] = FaceClass::kFloor;
    } else if (std::abs(nz) < sin_tol) {
      out[f] = FaceClass::kWall;
    } else if (nz >= cos_tol && face_max_z - min_z > ClassifyTolerance::kFloorHeight) {
      out[f] = FaceClass::kRoof;
    }
  }
  return out;
}

FaceClass classify_face(const QuantizedMesh& mesh, std::size_t face_index) {
  if (face_index >= mesh.faces.size()) throw Error("face index out of range");
  return classify_faces(mesh)[face_index];
}

}  // namespace polybuild
