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
#include <functional>
#include <string>

#include "polybuild/models/config.hpp"
#include "polybuild/nn/autograd.hpp"

namespace polybuild {

struct GradCheckResult {
  double max_rel_error = 0;
  double max_abs_error = 0;
  int checked = 0;
  std::size_t parameters = 0;
  std::string worst;  // "name[index]" of the largest relative error
};

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central finite differences on `samples` parameter entries drawn uniformly
/// over all entries of the store, against one backward pass of `loss`.
GradCheckResult gradient_check(nn::ParamStore<double>& store, const std::function<int(nn::Tape<double>&)>& loss,
                               int samples, double epsilon, std::uint64_t seed);

/// Configuration of the miniature end-to-end model (encoder, vertex module,
/// face module; under 10^4 parameters).
models::ModelConfig miniature_config();

/// Checks the summed vertex and face losses of the miniature model on a
/// small fixed building.
GradCheckResult miniature_gradient_check(int samples, double epsilon, std::uint64_t seed);

/// Checks a single linear layer with a squared loss.
GradCheckResult linear_gradient_check(int samples, double epsilon, std::uint64_t seed);

}  // namespace polybuild
