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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polybuild/dataset.hpp"
#include "polybuild/models/face_model.hpp"
#include "polybuild/models/vertex_model.hpp"

namespace polybuild::training {

struct AugmentConfig {
  bool enabled = true;
  double scale_min = 0.8;
  double scale_max = 1.2;
  bool rotate = true;
  double jitter_fraction = 0.1;  // max per-point displacement / object diameter
};

struct TrainConfig {
  int batch_size = 16;
  double max_grad_norm = 1.0;
  double peak_lr = 3e-4;
  int warmup_steps = 200;
  int total_steps = 20000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  AugmentConfig augment;
  std::uint64_t seed = 0;
  int log_every = 50;
  int checkpoint_every = 1000;
  models::ModelConfig model;

  void validate() const;
};

void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Linear warm-up to the peak, then cosine annealing to zero.
double lr_schedule(int step, const TrainConfig& cfg);

/// The draw behind one augmentation.
struct AugmentDraw {
  Vec3 scale{1, 1, 1};
  double angle = 0;
  double jitter = 0;  // amplitude in meters
};

/// Scales per axis and rotates about z (cloud and mesh alike) and jitters
/// cloud points independently. Identity when disabled.
DataSample augment(const DataSample& sample, const AugmentConfig& cfg, Rng& rng, AugmentDraw* draw = nullptr);

/// Adam over a float parameter store.
class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void update(nn::ParamStore<float>& store, double lr);
  int steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

/// Global L2 norm of all gradients.
double grad_norm(const nn::ParamStore<float>& store);
/// Rescales gradients to at most max_norm; returns the norm before clipping.
double clip_grad_norm(nn::ParamStore<float>& store, double max_norm);

enum class Module { kVertex, kFace };
const char* to_string(Module m);
Module module_from_string(const std::string& s);

struct StepStats {
  int step = 0;  // 1-based index of the completed step
  double lr = 0;
  double loss = 0;
  double grad_norm = 0;     // before clipping
  double clipped_norm = 0;  // after clipping
};

/// Teacher-forced training of one module on its own parameter set.
class Trainer {
 public:
  Trainer(Module module, const TrainConfig& cfg, std::vector<DataSample> data);

  StepStats step();
  /// Mean teacher-forced loss over the given samples in inference mode.
  double evaluate_loss(const std::vector<DataSample>& samples) const;
  int steps_done() const { return step_; }

  Module module() const { return module_; }
  const TrainConfig& config() const { return cfg_; }
  nn::ParamStore<float>& store() { return store_; }
  const models::VertexModel<float>& vertex_model() const { return vertex_; }
  const models::FaceModel<float>& face_model() const { return face_; }

  nlohmann::json checkpoint_config() const;
  void save(const std::string& path) const;

 private:
  const PreparedSample& prepared(std::size_t index);
  int sample_loss(const PreparedSample& p, nn::Tape<float>& tape) const;

  Module module_;
  TrainConfig cfg_;
  std::vector<DataSample> data_;
  std::vector<std::optional<PreparedSample>> cache_;
  PreparedSample scratch_;
  nn::ParamStore<float> store_;
  models::VertexModel<float> vertex_;
  models::FaceModel<float> face_;
  Adam adam_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  int step_ = 0;
};

/// Trains for cfg.total_steps, calling `on_step` after every step.
void train(Trainer& trainer, const std::function<void(const StepStats&)>& on_step);

/// Loads a trained module from a checkpoint into a fresh store.
struct LoadedVertexModel {
  nn::ParamStore<float> store;
  models::VertexModel<float> model;
};
struct LoadedFaceModel {
  nn::ParamStore<float> store;
  models::FaceModel<float> model;
};
std::unique_ptr<LoadedVertexModel> load_vertex_model(const std::string& path);
std::unique_ptr<LoadedFaceModel> load_face_model(const std::string& path);

}  // namespace polybuild::training
