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


#include "polybuild/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <set>

#include "polybuild/mesh_io.hpp"

namespace polybuild::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, data_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw CheckpointError(path_ + ": truncated checkpoint");
  }
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

nlohmann::json read_header(Reader& r, const std::string& path) {
  if (r.bytes(sizeof(kCheckpointMagic)) != std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw CheckpointError(path + ": not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = r.get<std::uint64_t>();
  try {
    return nlohmann::json::parse(r.bytes(len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": bad config echo: " + e.what());
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const nlohmann::json& config, const ParamStore<float>& store) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string cfg = config.dump();
  put<std::uint64_t>(out, cfg.size());
  out += cfg;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.all().size()));
  for (const auto& p : store.all()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put<std::int32_t>(out, p->value.rows());
    put<std::int32_t>(out, p->value.cols());
    out.append(reinterpret_cast<const char*>(p->value.data()), p->value.size() * sizeof(float));
  }
  write_file_atomic(path, out);
}

nlohmann::json read_checkpoint_config(const std::string& path) {
  Reader r(read_file(path), path);
  return read_header(r, path);
}

nlohmann::json load_checkpoint(const std::string& path, ParamStore<float>& store) {
  Reader r(read_file(path), path);
  nlohmann::json config = read_header(r, path);
  const auto count = r.get<std::uint32_t>();
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.get<std::uint32_t>());
    const int rows = r.get<std::int32_t>();
    const int cols = r.get<std::int32_t>();
    Parameter<float>* p = store.find(name);
    if (!p) throw CheckpointError(path + ": unexpected parameter " + name);
    if (p->value.rows() != rows || p->value.cols() != cols) {
      throw CheckpointError(path + ": shape mismatch for " + name + ": stored " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", model " + p->value.shape_string());
    }
    const std::string blob = r.bytes(static_cast<std::size_t>(rows) * cols * sizeof(float));
    std::memcpy(p->value.data(), blob.data(), blob.size());
    seen.insert(name);
  }
  if (!r.done()) throw CheckpointError(path + ": trailing bytes");
  for (const auto& p : store.all()) {
    if (!seen.count(p->name)) throw CheckpointError(path + ": missing parameter " + p->name);
  }
  return config;
}

}  // namespace polybuild::nn
