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


#include "polybuild/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "polybuild/codec.hpp"
#include "polybuild/validity.hpp"

namespace polybuild::synthetic {
namespace {

constexpr double kEndTiltDeg = 25.0;  // tilt of steep roof ends away from vertical

class Builder {
 public:
  int vertex(double x, double y, double z) {
    mesh.vertices.push_back({x, y, z});
    return static_cast<int>(mesh.vertices.size()) - 1;
  }
  void face(Face f) { mesh.faces.push_back(std::move(f)); }

  /// Walls and downward floor of a counter-clockwise footprint ring; returns
  /// the top ring.
  std::vector<int> prism(const std::vector<std::pair<double, double>>& ring, double z0, double z1, bool floor) {
    std::vector<int> bottom, top;
    for (const auto& [x, y] : ring) bottom.push_back(vertex(x, y, z0));
    for (const auto& [x, y] : ring) top.push_back(vertex(x, y, z1));
    const std::size_t n = ring.size();
    if (floor) face(Face(bottom.rbegin(), bottom.rend()));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      face({bottom[i], bottom[j], top[j], top[i]});
    }
    return top;
  }

  PolyMesh mesh;
};

double tan_deg(double d) { return std::tan(d * std::numbers::pi / 180.0); }

/// Horizontal inset that tilts a face of vertical rise `rise` by the end
/// tilt on the lattice, whose cells are span/256 wide and height/256 tall.
double lattice_inset(double rise, double span, double total_height) {
  return tan_deg(kEndTiltDeg) * rise * span / total_height;
}

void add_chimney(Builder& b, const BuildingSpec& s, double base) {
  const double x0 = s.chimney_x, y0 = s.chimney_y, c = s.chimney_size;
  const std::vector<std::pair<double, double>> ring = {{x0, y0}, {x0 + c, y0}, {x0 + c, y0 + c}, {x0, y0 + c}};
  const std::vector<int> top = b.prism(ring, base, base + s.chimney_height, false);
  b.face(top);
}

PolyMesh place(PolyMesh m, const BuildingSpec& s) {
  for (Vec3& v : m.vertices) {
    for (int t = 0; t < ((s.quarter_turns % 4) + 4) % 4; ++t) v = {-v.y, v.x, v.z};
    v += s.origin;
  }
  return m;
}

}  // namespace

const char* to_string(Footprint f) { return f == Footprint::kRectangle ? "rectangle" : "l-shape"; }

const char* to_string(Roof r) {
  switch (r) {
    case Roof::kFlat: return "flat";
    case Roof::kGable: return "gable";
    case Roof::kHip: return "hip";
    case Roof::kShed: return "shed";
  }
  return "?";
}

void BuildingSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("building spec: ") + what);
  };
  require(length > 0 && width > 0 && height > 0, "dimensions must be positive");
  require(pitch_deg > 0 && pitch_deg < 80, "pitch outside (0, 80) degrees");
  require(overhang >= 0 && fascia > 0, "negative overhang or fascia");
  if (footprint == Footprint::kLShape) {
    require(notch_length > 0 && notch_length < length && notch_width > 0 && notch_width < width,
            "notch must lie inside the footprint");
    require(roof == Roof::kFlat && overhang == 0 && !chimney, "l-shapes carry a plain flat roof");
  }
  if (roof != Roof::kFlat) require(overhang == 0 && !chimney, "overhangs and chimneys need a flat roof");
  if (roof == Roof::kHip) require(length > width, "hip roofs need length > width");
  if (chimney) {
    require(chimney_size > 0 && chimney_height > 0, "chimney dimensions must be positive");
    require(chimney_x > 0 && chimney_y > 0 && chimney_x + chimney_size < length && chimney_y + chimney_size < width,
            "chimney outside the roof");
  }
}

void to_json(nlohmann::json& j, const BuildingSpec& s) {
  j = nlohmann::json{{"footprint", to_string(s.footprint)},
                     {"length", s.length},
                     {"width", s.width},
                     {"notch_length", s.notch_length},
                     {"notch_width", s.notch_width},
                     {"height", s.height},
                     {"roof", to_string(s.roof)},
                     {"pitch_deg", s.pitch_deg},
                     {"overhang", s.overhang},
                     {"fascia", s.fascia},
                     {"chimney", s.chimney},
                     {"chimney_x", s.chimney_x},
                     {"chimney_y", s.chimney_y},
                     {"chimney_size", s.chimney_size},
                     {"chimney_height", s.chimney_height},
                     {"quarter_turns", s.quarter_turns},
                     {"origin", {s.origin.x, s.origin.y, s.origin.z}}};
}

void ScanSpec::validate() const {
  if (!(roof_density > 0 && wall_density > 0)) throw Error("scan spec: densities must be positive");
  if (!(noise_sigma >= 0)) throw Error("scan spec: negative noise");
  if (!(wall_dropout >= 0 && wall_dropout <= 1)) throw Error("scan spec: dropout outside [0, 1]");
}

void to_json(nlohmann::json& j, const ScanSpec& s) {
  j = nlohmann::json{{"roof_density", s.roof_density},
                     {"wall_density", s.wall_density},
                     {"noise_sigma", s.noise_sigma},
                     {"wall_dropout", s.wall_dropout}};
}

void from_json(const nlohmann::json& j, ScanSpec& s) {
  ScanSpec d;
  s.roof_density = j.value("roof_density", d.roof_density);
  s.wall_density = j.value("wall_density", d.wall_density);
  s.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  s.wall_dropout = j.value("wall_dropout", d.wall_dropout);
  s.validate();
}

void to_json(nlohmann::json& j, const BuildingOptions& o) {
  j = nlohmann::json{{"min_length", o.min_length},
                     {"max_length", o.max_length},
                     {"min_width", o.min_width},
                     {"max_width", o.max_width},
                     {"min_height", o.min_height},
                     {"max_height", o.max_height},
                     {"l_shape_probability", o.l_shape_probability},
                     {"overhang_probability", o.overhang_probability},
                     {"chimney_probability", o.chimney_probability},
                     {"random_turns", o.random_turns}};
}

void from_json(const nlohmann::json& j, BuildingOptions& o) {
  BuildingOptions d;
  o.min_length = j.value("min_length", d.min_length);
  o.max_length = j.value("max_length", d.max_length);
  o.min_width = j.value("min_width", d.min_width);
  o.max_width = j.value("max_width", d.max_width);
  o.min_height = j.value("min_height", d.min_height);
  o.max_height = j.value("max_height", d.max_height);
  o.l_shape_probability = j.value("l_shape_probability", d.l_shape_probability);
  o.overhang_probability = j.value("overhang_probability", d.overhang_probability);
  o.chimney_probability = j.value("chimney_probability", d.chimney_probability);
  o.random_turns = j.value("random_turns", d.random_turns);
  if (!(o.min_length > 0 && o.min_length <= o.max_length && o.min_width > 0 && o.min_width <= o.max_width &&
        o.min_height > 0 && o.min_height <= o.max_height)) {
    throw Error("building options: bad dimension ranges");
  }
}

BuildingSpec random_building_spec(Rng& rng, const BuildingOptions& o) {
  BuildingSpec s;
  const double a = uniform(rng, o.min_length, o.max_length);
  const double b = uniform(rng, o.min_width, o.max_width);
  s.length = std::max(a, b);
  s.width = std::min(a, b);
  s.height = uniform(rng, o.min_height, o.max_height);
  if (bernoulli(rng, o.l_shape_probability)) {
    s.footprint = Footprint::kLShape;
    s.notch_length = s.length * uniform(rng, 0.3, 0.6);
    s.notch_width = s.width * uniform(rng, 0.3, 0.6);
  } else {
    switch (uniform_index(rng, 4)) {
      case 0: s.roof = Roof::kFlat; break;
      case 1: s.roof = Roof::kGable; break;
      case 2: s.roof = Roof::kHip; break;
      default: s.roof = Roof::kShed; break;
    }
    s.pitch_deg = s.roof == Roof::kShed ? uniform(rng, 10, 25) : uniform(rng, 20, 40);
    if (s.roof == Roof::kHip && s.length < 1.3 * s.width) s.length = 1.3 * s.width;
    if (s.roof == Roof::kFlat) {
      if (bernoulli(rng, o.overhang_probability)) {
        // Below two lattice cells so scan points on the eaves stay within the
        // coverage buffer of the floor, above one so the ring does not merge.
        s.overhang = 0.0055 * s.length * uniform(rng, 1.0, 1.15);
        s.fascia = std::max(0.3, 3.0 * s.height / 256.0);
      }
      if (bernoulli(rng, o.chimney_probability)) {
        s.chimney = true;
        s.chimney_size = uniform(rng, 0.7, 1.4);
        s.chimney_height = uniform(rng, 1.0, 2.5);
        s.chimney_x = uniform(rng, 1.0, s.length - s.chimney_size - 1.0);
        s.chimney_y = uniform(rng, 1.0, s.width - s.chimney_size - 1.0);
      }
    }
  }
  s.quarter_turns = o.random_turns ? static_cast<int>(uniform_index(rng, 4)) : 0;
  s.origin = {uniform(rng, -500, 500), uniform(rng, -500, 500), uniform(rng, 0, 100)};
  return s;
}

PolyMesh generate_building(const BuildingSpec& s) {
  s.validate();
  Builder b;
  const double L = s.length, W = s.width, H = s.height;
  if (s.footprint == Footprint::kLShape) {
    // Two convex floor/roof polygons split at x = L - nl; the front wall is
    // split at the junction vertex so every floor edge borders a wall.
    const double xs = L - s.notch_length, yn = W - s.notch_width;
    const std::vector<std::pair<double, double>> ring = {{0, 0}, {xs, 0}, {L, 0}, {L, yn}, {xs, yn}, {xs, W}, {0, W}};
    std::vector<int> bottom, top;
    for (const auto& [x, y] : ring) bottom.push_back(b.vertex(x, y, 0));
    for (const auto& [x, y] : ring) top.push_back(b.vertex(x, y, H));
    b.face({bottom[0], bottom[6], bottom[5], bottom[4], bottom[1]});
    b.face({bottom[1], bottom[4], bottom[3], bottom[2]});
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const std::size_t j = (i + 1) % ring.size();
      b.face({bottom[i], bottom[j], top[j], top[i]});
    }
    b.face({top[0], top[1], top[4], top[5], top[6]});
    b.face({top[1], top[2], top[3], top[4]});
    return place(b.mesh, s);
  }

  const std::vector<std::pair<double, double>> ring = {{0, 0}, {L, 0}, {L, W}, {0, W}};
  const std::vector<int> t = b.prism(ring, 0, H, true);
  switch (s.roof) {
    case Roof::kFlat: {
      double roof_z = H;
      if (s.overhang > 0) {
        const double d = s.overhang;
        const std::vector<std::pair<double, double>> outer = {{-d, -d}, {L + d, -d}, {L + d, W + d}, {-d, W + d}};
        std::vector<int> o, u;
        for (const auto& [x, y] : outer) o.push_back(b.vertex(x, y, H));
        for (const auto& [x, y] : outer) u.push_back(b.vertex(x, y, H + s.fascia));
        for (int i = 0; i < 4; ++i) {
          const int j = (i + 1) % 4;
          b.face({t[i], t[j], o[j], o[i]});  // soffit, facing down
          b.face({o[i], o[j], u[j], u[i]});  // fascia
        }
        b.face(u);
        roof_z = H + s.fascia;
      } else {
        b.face(t);
      }
      if (s.chimney) add_chimney(b, s, roof_z);
      break;
    }
    case Roof::kGable:
    case Roof::kHip: {
      const double rise = 0.5 * W * tan_deg(s.pitch_deg);
      double inset = s.roof == Roof::kHip ? 0.5 * W : lattice_inset(rise, L, H + rise);
      inset = std::min(inset, 0.45 * L);
      const int r0 = b.vertex(inset, 0.5 * W, H + rise);
      const int r1 = b.vertex(L - inset, 0.5 * W, H + rise);
      b.face({t[0], t[1], r1, r0});
      b.face({t[2], t[3], r0, r1});
      b.face({t[3], t[0], r0});
      b.face({t[1], t[2], r1});
      break;
    }
    case Roof::kShed: {
      const double rise = 0.8 * W * tan_deg(s.pitch_deg);
      const double sy = std::min(lattice_inset(rise, W, H + rise), 0.4 * W);
      const double sx = std::min(lattice_inset(rise, L, H + rise), 0.4 * L);
      const int h2 = b.vertex(L - sx, W - sy, H + rise);
      const int h3 = b.vertex(sx, W - sy, H + rise);
      b.face({t[0], t[1], h2, h3});
      b.face({t[2], t[3], h3, h2});
      b.face({t[3], t[0], h3});
      b.face({t[1], t[2], h2});
      break;
    }
  }
  return place(b.mesh, s);
}

PointCloud simulate_scan(const PolyMesh& mesh, const ScanSpec& scan, Rng& rng) {
  scan.validate();
  mesh.validate();
  const double wall_limit = std::sin(5.0 * std::numbers::pi / 180.0);
  PointCloud cloud;
  for (const Face& f : mesh.faces) {
    std::vector<Vec3> poly;
    for (int i : f) poly.push_back(mesh.vertices[i]);
    const Vec3 n = newell_normal(poly);
    const double len = norm(n);
    if (len <= 0) continue;
    const double nz = n.z / len;
    if (nz < -wall_limit) continue;  // floors and soffits face away from the sensor
    double density = scan.roof_density;
    if (std::abs(nz) < wall_limit) {
      if (bernoulli(rng, scan.wall_dropout)) continue;
      density = scan.wall_density;
    }
    PolyMesh single;
    single.vertices = poly;
    Face fan(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) fan[i] = static_cast<int>(i);
    single.faces.push_back(fan);
    const double expected = face_area(single, fan) * density;
    std::size_t count = static_cast<std::size_t>(std::floor(expected));
    if (bernoulli(rng, expected - std::floor(expected))) ++count;
    if (count == 0) continue;
    const PointCloud pts = sample_surface(single, count, rng());
    for (Vec3 p : pts.points) {
      if (scan.noise_sigma > 0) {
        p.x += scan.noise_sigma * standard_normal(rng);
        p.y += scan.noise_sigma * standard_normal(rng);
        p.z += scan.noise_sigma * standard_normal(rng);
      }
      cloud.points.push_back(p);
    }
  }
  if (cloud.empty()) throw Error("scan produced an empty cloud");
  return cloud;
}

std::string verify_pair(const PolyMesh& mesh, const PointCloud& cloud) {
  if (mesh.vertices.size() > static_cast<std::size_t>(kMaxVertices) || mesh.faces.size() > static_cast<std::size_t>(kMaxFaces)) {
    return "over size limits";
  }
  const auto [normalized, transform] = normalize(cloud);
  const LatticeBox box = bounding_box(normalized);
  const QuantizedMesh q = quantize(mesh, transform, box);
  if (q.vertices.size() != mesh.vertices.size()) return "vertices merged on the lattice";
  if (q.faces.size() != mesh.faces.size()) return "faces collapsed on the lattice";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3 p = transform.apply(mesh.vertices[i]);
    const Vec3 back = lattice_to_normalized(q.vertices[i], box);
    for (int a = 0; a < 3; ++a) {
      if (std::abs(p[a] - back[a]) > box.extent(a) / 512.0 * (1 + 1e-9)) return "vertex outside the cloud bounds";
    }
  }
  const QuantizedMesh c = canonicalize(q);
  const Validity v = check_mesh(c, normalized);
  if (v != Validity::kOk) return to_string(v);
  return {};
}

Sample generate_sample(std::uint64_t seed, std::size_t index, const BuildingOptions& options, const ScanSpec& scan) {
  Sample s;
  s.seed = derive_seed(seed, index);
  char name[32];
  std::snprintf(name, sizeof(name), "b%05zu", index);
  s.name = name;
  Rng rng(s.seed);
  constexpr int kBuildings = 50, kScans = 20;
  for (int b = 0; b < kBuildings; ++b) {
    s.spec = random_building_spec(rng, options);
    s.mesh = generate_building(s.spec);
    for (int k = 0; k < kScans; ++k) {
      ++s.attempts;
      s.cloud = simulate_scan(s.mesh, scan, rng);
      if (verify_pair(s.mesh, s.cloud).empty()) return s;
    }
  }
  throw Error("could not draw a valid building for sample " + s.name);
}

std::vector<Sample> generate_corpus(std::size_t n, std::uint64_t seed, const BuildingOptions& options,
                                   const ScanSpec& scan, int jobs) {
  std::vector<Sample> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n && !failed;) {
      try {
        out[i] = generate_sample(seed, i, options, scan);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace polybuild::synthetic
