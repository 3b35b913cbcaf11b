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

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polybuild {

/// Base exception for all recoverable domain errors in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  bool operator==(const Vec3&) const = default;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
/// Squared Euclidean distance. Evaluation order is fixed so that every
/// nearest-neighbour routine in the library produces identical bits.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return (dx * dx + dy * dy) + dz * dz;
}
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }

/// Integer lattice coordinate on the 256^3 quantization grid.
struct IVec3 {
  int x = 0, y = 0, z = 0;
  bool operator==(const IVec3&) const = default;
  int operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
};

/// Lexicographic (z, y, x) order used for canonical vertex sequences.
inline bool zyx_less(const IVec3& a, const IVec3& b) {
  if (a.z != b.z) return a.z < b.z;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

using Face = std::vector<int>;

struct PointCloud {
  std::vector<Vec3> points;
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Maps world coordinates (meters) into the unit-sphere frame:
/// normalized = (world + translation) * scale.
struct NormTransform {
  Vec3 translation;
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p + translation) * scale; }
  Vec3 invert(const Vec3& q) const { return q * (1.0 / scale) - translation; }
};

struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  /// Throws Error when a face is short, repeats an index or points past the
  /// vertex list.
  void validate() const;
};

/// Axis-aligned bounds of the normalized cloud; the quantization lattice.
struct LatticeBox {
  Vec3 lo;
  Vec3 hi;
  /// Per-axis extent with zero-extent axes widened to one normalized unit.
  double extent(int axis) const;
};

inline constexpr int kLatticeSize = 256;

struct QuantizedMesh {
  std::vector<IVec3> vertices;
  std::vector<Face> faces;
  NormTransform transform;
  LatticeBox box;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Normalization and quantization

std::pair<PointCloud, NormTransform> normalize(const PointCloud& cloud);
LatticeBox bounding_box(const PointCloud& cloud);

/// Lattice index of one normalized coordinate on one axis.
int quantize_coordinate(double value, double lo, double extent);

/// Quantizes a world-frame mesh on the lattice spanned by the normalized
/// cloud. Collapsing vertices are merged and faces reduced below three
/// distinct corners are dropped.
QuantizedMesh quantize(const PolyMesh& mesh, const PointCloud& cloud);
QuantizedMesh quantize(const PolyMesh& mesh, const NormTransform& transform, const LatticeBox& box);

/// Lattice cell centre in the normalized frame.
Vec3 lattice_to_normalized(const IVec3& q, const LatticeBox& box);
/// Continuous lattice coordinates of a normalized-frame point.
Vec3 normalized_to_lattice(const Vec3& p, const LatticeBox& box);

/// Back to world meters.
PolyMesh dequantize(const QuantizedMesh& mesh);

/// Vertices sorted by (z, y, x), faces rotated to start at their lowest index
/// and sorted lexicographically.
QuantizedMesh canonicalize(const QuantizedMesh& mesh);
bool is_canonical(const QuantizedMesh& mesh);

// ---------------------------------------------------------------------------
// Surface sampling and distances

double face_area(const PolyMesh& mesh, const Face& face);
double surface_area(const PolyMesh& mesh);

/// Area-proportional uniform samples over the fan-triangulated faces.
PointCloud sample_surface(const PolyMesh& mesh, std::size_t n, std::uint64_t seed);

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_to_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_to_mesh_distance(const Vec3& p, const PolyMesh& mesh);

// ---------------------------------------------------------------------------
// Face classification on the lattice

enum class FaceClass { kFloor, kWall, kRoof, kOther };

const char* to_string(FaceClass c);

/// Newell normal of a polygon; zero vector for degenerate faces.
Vec3 newell_normal(std::span<const Vec3> polygon);

struct FaceGeometry {
  Vec3 unit_normal;
  double area = 0;
  double planarity_residual = 0;  // max distance to best-fit plane, lattice units
  bool degenerate = true;
};

FaceGeometry face_geometry(const QuantizedMesh& mesh, const Face& face);

/// Classifies every face. Floors are downward faces resting at the lowest
/// downward-facing level of the mesh.
std::vector<FaceClass> classify_faces(const QuantizedMesh& mesh);
FaceClass classify_face(const QuantizedMesh& mesh, std::size_t face_index);

/// Tolerances of the classification, in degrees and lattice units.
struct ClassifyTolerance {
  static constexpr double kAngleDeg = 5.0;
  static constexpr double kPlanarity = 0.5;
  static constexpr double kFloorHeight = 1.0;
};

}  // namespace polybuild
