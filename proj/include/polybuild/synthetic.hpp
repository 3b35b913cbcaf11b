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
#include <string>
#include <vector>

#include <json.hpp>

#include "polybuild/geometry.hpp"
#include "polybuild/random.hpp"

namespace polybuild::synthetic {

enum class Footprint { kRectangle, kLShape };
enum class Roof { kFlat, kGable, kHip, kShed };

const char* to_string(Footprint f);
const char* to_string(Roof r);

/// Parametric building in meters. The footprint spans [0, length] x
/// [0, width]; an L-shape removes the notch_length x notch_width corner at
/// (length, width). Ridges run along x.
struct BuildingSpec {
  Footprint footprint = Footprint::kRectangle;
  double length = 10;
  double width = 8;
  double notch_length = 0;
  double notch_width = 0;
  double height = 6;  // eave height
  Roof roof = Roof::kFlat;
  double pitch_deg = 30;
  double overhang = 0;       // flat roofs only; 0 = none
  double fascia = 0.3;       // fascia height of an overhang
  bool chimney = false;      // flat rectangles only
  double chimney_x = 0, chimney_y = 0, chimney_size = 0.8, chimney_height = 1.5;
  int quarter_turns = 0;     // exact 90-degree turns about z
  Vec3 origin;               // world offset of the footprint corner

  void validate() const;
};

void to_json(nlohmann::json& j, const BuildingSpec& s);

/// Airborne scan characteristics.
struct ScanSpec {
  double roof_density = 10.0;  // points per square meter
  double wall_density = 3.0;
  double noise_sigma = 0.02;   // meters
  double wall_dropout = 0.3;   // per-wall occlusion probability

  void validate() const;
};

void to_json(nlohmann::json& j, const ScanSpec& s);
void from_json(const nlohmann::json& j, ScanSpec& s);

/// Ranges of the random building draw.
struct BuildingOptions {
  double min_length = 8, max_length = 30;
  double min_width = 6, max_width = 20;
  double min_height = 3, max_height = 12;
  double l_shape_probability = 0.2;
  double overhang_probability = 0.25;
  double chimney_probability = 0.25;
  bool random_turns = true;  // quarter turns keep the footprint axis-aligned
};

void to_json(nlohmann::json& j, const BuildingOptions& o);
void from_json(const nlohmann::json& j, BuildingOptions& o);

BuildingSpec random_building_spec(Rng& rng, const BuildingOptions& options = {});

/// Closed polygonal mesh of a spec. Floors wind downward, roofs upward.
PolyMesh generate_building(const BuildingSpec& spec);

/// Area-proportional sampling at the face's class density (floors and other
/// downward faces receive none), per-wall dropout, Gaussian noise.
PointCloud simulate_scan(const PolyMesh& mesh, const ScanSpec& scan, Rng& rng);

/// Why a (mesh, cloud) pair is unusable, or empty when it is usable: the
/// quantized pair must keep every vertex and face, respect the
/// dequantization bound and pass the validity checks.
std::string verify_pair(const PolyMesh& mesh, const PointCloud& cloud);

struct Sample {
  std::string name;
  std::uint64_t seed = 0;
  BuildingSpec spec;
  PolyMesh mesh;
  PointCloud cloud;
  int attempts = 0;
};

/// Draws buildings and scans until the pair verifies. Each sample depends
/// only on (seed, index).
Sample generate_sample(std::uint64_t seed, std::size_t index, const BuildingOptions& options, const ScanSpec& scan);

std::vector<Sample> generate_corpus(std::size_t n, std::uint64_t seed, const BuildingOptions& options,
                                   const ScanSpec& scan, int jobs = 1);

}  // namespace polybuild::synthetic
