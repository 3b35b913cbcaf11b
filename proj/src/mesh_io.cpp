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

#include "polybuild/mesh_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace polybuild {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_real(std::string_view tok, const std::string& source, std::size_t line) {
  // strtod accepts "nan"/"inf"; reject them explicitly below.
  std::string buf(tok);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) fail(source, line, "malformed number '" + buf + "'");
  if (!std::isfinite(v)) fail(source, line, "non-finite coordinate '" + buf + "'");
  return v;
}

long parse_index(std::string_view tok, const std::string& source, std::size_t line) {
  const auto slash = tok.find('/');
  if (slash != std::string_view::npos) tok = tok.substr(0, slash);
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(source, line, "malformed index '" + std::string(tok) + "'");
  }
  return v;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PolyMesh parse_mesh(std::istream& in, const std::string& source) {
  PolyMesh mesh;
  struct PendingFace {
    std::vector<long> raw;
    std::size_t line;
  };
  std::vector<PendingFace> pending;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(strip_comment(line));
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) fail(source, lineno, "vertex needs 3 coordinates");
      mesh.vertices.push_back({parse_real(toks[1], source, lineno), parse_real(toks[2], source, lineno),
                               parse_real(toks[3], source, lineno)});
    } else if (toks[0] == "f") {
      if (toks.size() < 4) fail(source, lineno, "face needs at least 3 indices");
      PendingFace pf{{}, lineno};
      for (std::size_t i = 1; i < toks.size(); ++i) pf.raw.push_back(parse_index(toks[i], source, lineno));
      pending.push_back(std::move(pf));
    }
  }

  const long n = static_cast<long>(mesh.vertices.size());
  for (const PendingFace& pf : pending) {
    Face face;
    for (long raw : pf.raw) {
      // Negative indices are relative to the end of the vertex list.
      const long idx = raw > 0 ? raw - 1 : (raw < 0 ? n + raw : -1);
      if (idx < 0 || idx >= n) {
        fail(source, pf.line, "vertex index " + std::to_string(raw) + " out of range (" + std::to_string(n) +
                                  " vertices)");
      }
      for (int prev : face) {
        if (prev == idx) fail(source, pf.line, "face repeats vertex " + std::to_string(raw));
      }
      face.push_back(static_cast<int>(idx));
    }
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

PolyMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_mesh(in, path.string());
}

void write_mesh(std::ostream& out, const PolyMesh& mesh) {
  for (const Vec3& v : mesh.vertices) {
    out << "v " << format_real(v.x) << ' ' << format_real(v.y) << ' ' << format_real(v.z) << '\n';
  }
  for (const Face& f : mesh.faces) {
    out << 'f';
    for (int idx : f) out << ' ' << (idx + 1);
    out << '\n';
  }
}

void write_mesh(const std::filesystem::path& path, const PolyMesh& mesh) {
  std::ostringstream os;
  write_mesh(os, mesh);
  write_file_atomic(path, os.str());
}

PointCloud parse_cloud(std::istream& in, const std::string& source) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(strip_comment(line));
    if (toks.empty()) continue;
    if (toks.size() != 3) fail(source, lineno, "expected 3 coordinates, got " + std::to_string(toks.size()));
    cloud.points.push_back({parse_real(toks[0], source, lineno), parse_real(toks[1], source, lineno),
                            parse_real(toks[2], source, lineno)});
  }
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_cloud(in, path.string());
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  for (const Vec3& p : cloud.points) {
    out << format_real(p.x) << ' ' << format_real(p.y) << ' ' << format_real(p.z) << '\n';
  }
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream os;
  write_cloud(os, cloud);
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace polybuild
