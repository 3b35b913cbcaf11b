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

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "polybuild/validity.hpp"

namespace polybuild {
namespace {

using testing::make_scene;
using testing::surface_cloud;
using testing::unit_box;

TEST(Validity, BoxPassesEveryCheck) {
  const testing::Scene s = make_scene(unit_box(), surface_cloud(unit_box()));
  EXPECT_GE(floor_coverage_fraction(s.mesh, s.normalized), kCoverageFraction);
  EXPECT_EQ(check_floor_coverage(s.mesh, s.normalized), FloorCoverage::kOk);
  EXPECT_TRUE(check_floor_wall_connectivity(s.mesh));
  EXPECT_TRUE(check_no_diagonal_wall_edges(s.mesh));
  EXPECT_EQ(check_mesh(s.mesh, s.normalized), Validity::kOk);
}

TEST(Validity, DiagonalWallEdgeIsRejected) {
  const PolyMesh m = testing::diagonal_wall_box({0, 0, 0}, {10, 8, 6});
  const testing::Scene s = make_scene(m, surface_cloud(m));
  EXPECT_FALSE(check_no_diagonal_wall_edges(s.mesh));
  EXPECT_EQ(check_mesh(s.mesh, s.normalized), Validity::kDiagonalWalls);
}

TEST(Validity, MissingFloorFaceIsReported) {
  const PolyMesh box = unit_box();
  testing::Scene s = make_scene(box, surface_cloud(box));
  const std::vector<FaceClass> classes = classify_faces(s.mesh);
  const auto floor = std::find(classes.begin(), classes.end(), FaceClass::kFloor);
  ASSERT_NE(floor, classes.end());
  s.mesh.faces.erase(s.mesh.faces.begin() + (floor - classes.begin()));
  EXPECT_EQ(floor_coverage_fraction(s.mesh, s.normalized), 0.0);
  EXPECT_EQ(check_floor_coverage(s.mesh, s.normalized), FloorCoverage::kMissingFloorFaces);
  EXPECT_FALSE(check_floor_wall_connectivity(s.mesh));
  EXPECT_EQ(check_mesh(s.mesh, s.normalized), Validity::kMissingFloorFaces);
}

TEST(Validity, HalfFootprintMissesFloorVertices) {
  const PolyMesh full = unit_box();
  const testing::Scene s = make_scene(full, surface_cloud(full));
  const PolyMesh half = testing::box_mesh({0, 0, 0}, {5, 8, 6});
  const QuantizedMesh q = canonicalize(quantize(half, s.transform, s.box));
  const double f = floor_coverage_fraction(q, s.normalized);
  EXPECT_GT(f, 0.3);
  EXPECT_LT(f, 0.7);
  EXPECT_EQ(check_floor_coverage(q, s.normalized), FloorCoverage::kMissingFloorVertices);
  EXPECT_EQ(check_mesh(q, s.normalized), Validity::kMissingFloorVertices);
}

TEST(Validity, SlopedSideBreaksFloorWallConnectivity) {
  const PolyMesh m = testing::leaning_box({0, 0, 0}, {10, 8, 6}, 4.0);
  const testing::Scene s = make_scene(m, surface_cloud(m));
  EXPECT_FALSE(check_floor_wall_connectivity(s.mesh));
}

TEST(Validity, BufferWidensCoverage) {
  const PolyMesh full = unit_box();
  const testing::Scene s = make_scene(full, surface_cloud(full));
  const PolyMesh smaller = testing::box_mesh({0.2, 0.2, 0}, {9.8, 7.8, 6});
  const QuantizedMesh q = canonicalize(quantize(smaller, s.transform, s.box));
  EXPECT_LT(floor_coverage_fraction(q, s.normalized, 0.0), kCoverageFraction);
  EXPECT_EQ(floor_coverage_fraction(q, s.normalized, 12.0), 1.0);
}

}  // namespace
}  // namespace polybuild
