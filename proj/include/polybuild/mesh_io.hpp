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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "polybuild/geometry.hpp"

namespace polybuild {

/// Raised for malformed files; the message carries "<source>:<line>: ...".
class ParseError : public Error {
 public:
  using Error::Error;
};

// Wavefront-style meshes: `v x y z` and `f i j k ...` with 1-based indices.
// Other directives (vn, vt, o, g, s, usemtl) are ignored; `i/j/k` corner
// syntax keeps only the position index.
PolyMesh parse_mesh(std::istream& in, const std::string& source = "<stream>");
PolyMesh read_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const PolyMesh& mesh);
void write_mesh(const std::filesystem::path& path, const PolyMesh& mesh);

// Point clouds: one `x y z` triple per line; `#` starts a comment.
PointCloud parse_cloud(std::istream& in, const std::string& source = "<stream>");
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(std::ostream& out, const PointCloud& cloud);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace polybuild
