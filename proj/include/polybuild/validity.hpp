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

#include "polybuild/geometry.hpp"

namespace polybuild {

inline constexpr double kCoverageBuffer = 2.0;     // lattice units
inline constexpr double kCoverageFraction = 0.98;

enum class FloorCoverage { kOk, kMissingFloorFaces, kMissingFloorVertices };
const char* to_string(FloorCoverage c);

/// Fraction of cloud points whose xy projection lies inside, or within
/// `buffer` lattice units of, the union of the floor polygons.
double floor_coverage_fraction(const QuantizedMesh& mesh, const PointCloud& normalized, double buffer = kCoverageBuffer);

/// Floor coverage of the xy projection of a normalized cloud. When coverage
/// fails, the vertex bounding box decides whether any floor built from the
/// existing vertices could span the footprint.
FloorCoverage check_floor_coverage(const QuantizedMesh& mesh, const PointCloud& normalized);

/// Every boundary edge of the floor region (an edge used by exactly one floor
/// face) is also an edge of a wall face. False without floor faces.
bool check_floor_wall_connectivity(const QuantizedMesh& mesh);

/// Every edge of every wall face is horizontal or vertical on the lattice.
bool check_no_diagonal_wall_edges(const QuantizedMesh& mesh);

enum class Validity { kOk, kMissingFloorVertices, kMissingFloorFaces, kFloorConnectivity, kDiagonalWalls };
const char* to_string(Validity v);

/// Runs the checks in order: coverage, connectivity, diagonal walls.
Validity check_mesh(const QuantizedMesh& mesh, const PointCloud& normalized);

}  // namespace polybuild
