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

#include <string>

#include <json.hpp>

#include "polybuild/nn/autograd.hpp"

namespace polybuild::nn {

inline constexpr char kCheckpointMagic[8] = {'P', 'B', 'C', 'K', 'P', 'T', '\0', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Writes magic, version, the config JSON and every parameter as a named
/// little-endian float32 blob, atomically.
void save_checkpoint(const std::string& path, const nlohmann::json& config, const ParamStore<float>& store);

/// Reads only the config echo (used to build the model before loading).
nlohmann::json read_checkpoint_config(const std::string& path);

/// Loads parameter values into an already constructed store. Every stored
/// blob must match a parameter by name and shape and vice versa.
nlohmann::json load_checkpoint(const std::string& path, ParamStore<float>& store);

}  // namespace polybuild::nn
