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


#include "polybuild/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "polybuild/nn/checkpoint.hpp"

namespace polybuild::training {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("train config: ") + what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_grad_norm > 0, "max_grad_norm must be positive");
  require(peak_lr > 0, "peak_lr must be positive");
  require(warmup_steps >= 0 && warmup_steps < total_steps, "need 0 <= warmup_steps < total_steps");
  require(augment.scale_min > 0 && augment.scale_min <= augment.scale_max, "bad scale range");
  require(augment.jitter_fraction >= 0, "negative jitter");
  require(log_every >= 1 && checkpoint_every >= 1, "log/checkpoint intervals must be >= 1");
  model.validate();
}

void to_json(nlohmann::json& j, const AugmentConfig& c) {
  j = nlohmann::json{{"enabled", c.enabled},
                     {"scale_min", c.scale_min},
                     {"scale_max", c.scale_max},
                     {"rotate", c.rotate},
                     {"jitter_fraction", c.jitter_fraction}};
}

void from_json(const nlohmann::json& j, AugmentConfig& c) {
  AugmentConfig d;
  c.enabled = j.value("enabled", d.enabled);
  c.scale_min = j.value("scale_min", d.scale_min);
  c.scale_max = j.value("scale_max", d.scale_max);
  c.rotate = j.value("rotate", d.rotate);
  c.jitter_fraction = j.value("jitter_fraction", d.jitter_fraction);
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"max_grad_norm", c.max_grad_norm},
                     {"peak_lr", c.peak_lr},
                     {"warmup_steps", c.warmup_steps},
                     {"total_steps", c.total_steps},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"adam_eps", c.adam_eps},
                     {"augment", c.augment},
                     {"seed", c.seed},
                     {"log_every", c.log_every},
                     {"checkpoint_every", c.checkpoint_every},
                     {"model", c.model}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.batch_size = j.value("batch_size", d.batch_size);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.peak_lr = j.value("peak_lr", d.peak_lr);
  c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
  c.total_steps = j.value("total_steps", d.total_steps);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  c.augment = j.value("augment", d.augment);
  c.seed = j.value("seed", d.seed);
  c.log_every = j.value("log_every", d.log_every);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.model = j.value("model", d.model);
  c.validate();
}

double lr_schedule(int step, const TrainConfig& cfg) {
  if (step < cfg.warmup_steps) return cfg.peak_lr * step / cfg.warmup_steps;
  const double progress = static_cast<double>(step - cfg.warmup_steps) / (cfg.total_steps - cfg.warmup_steps);
  if (progress >= 1.0) return 0.0;
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

DataSample augment(const DataSample& sample, const AugmentConfig& cfg, Rng& rng, AugmentDraw* draw) {
  AugmentDraw d;
  if (!cfg.enabled) {
    if (draw) *draw = d;
    return sample;
  }
  for (int a = 0; a < 3; ++a) d.scale[a] = uniform(rng, cfg.scale_min, cfg.scale_max);
  if (cfg.rotate) d.angle = uniform(rng, 0.0, 2 * std::numbers::pi);
  const double c = std::cos(d.angle), s = std::sin(d.angle);
  auto apply = [&](const Vec3& p) {
    const Vec3 q{p.x * d.scale.x, p.y * d.scale.y, p.z * d.scale.z};
    return Vec3{c * q.x - s * q.y, s * q.x + c * q.y, q.z};
  };
  DataSample out;
  out.name = sample.name;
  out.mesh.faces = sample.mesh.faces;
  for (const Vec3& v : sample.mesh.vertices) out.mesh.vertices.push_back(apply(v));
  for (const Vec3& p : sample.cloud.points) out.cloud.points.push_back(apply(p));

  if (cfg.jitter_fraction > 0 && !out.cloud.empty()) {
    Vec3 lo = out.cloud.points.front(), hi = lo;
    for (const Vec3& p : out.cloud.points) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    d.jitter = uniform(rng, 0.0, cfg.jitter_fraction * norm(hi - lo));
    for (Vec3& p : out.cloud.points) {
      Vec3 u;
      do {
        u = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
      } while (dot(u, u) > 1.0);
      p += u * d.jitter;
    }
  }
  if (draw) *draw = d;
  return out;
}

void Adam::update(nn::ParamStore<float>& store, double lr) {
  const auto& params = store.all();
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p->value.size(), 0.0f);
      v_.emplace_back(p->value.size(), 0.0f);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Parameter<float>& p = *params[k];
    if (p.grad.empty()) continue;
    float* w = p.value.data();
    const float* g = p.grad.data();
    float* m = m_[k].data();
    float* v = v_[k].data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      w[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps_));
    }
  }
}

double grad_norm(const nn::ParamStore<float>& store) {
  double s = 0.0;
  for (const auto& p : store.all()) {
    for (float g : p->grad.values()) s += static_cast<double>(g) * g;
  }
  return std::sqrt(s);
}

double clip_grad_norm(nn::ParamStore<float>& store, double max_norm) {
  const double n = grad_norm(store);
  if (n > max_norm) {
    // Slightly under the limit so float rounding cannot push the result over.
    const float f = static_cast<float>(max_norm / n * (1.0 - 1e-6));
    for (const auto& p : store.all()) {
      for (float& g : p->grad.values()) g *= f;
    }
  }
  return n;
}

const char* to_string(Module m) { return m == Module::kVertex ? "vertex" : "face"; }

Module module_from_string(const std::string& s) {
  if (s == "vertex") return Module::kVertex;
  if (s == "face") return Module::kFace;
  throw Error("unknown module '" + s + "' (expected vertex or face)");
}

Trainer::Trainer(Module module, const TrainConfig& cfg, std::vector<DataSample> data)
    : module_(module),
      cfg_(cfg),
      data_(filter_dataset(std::move(data), static_cast<std::size_t>(cfg.model.max_vertices),
                           static_cast<std::size_t>(cfg.model.max_faces))),
      adam_(cfg.beta1, cfg.beta2, cfg.adam_eps),
      rng_(derive_seed(cfg.seed, 0x7e41)) {
  cfg_.validate();
  if (data_.empty()) throw Error("no data");
  cache_.resize(data_.size());
  Rng init(derive_seed(cfg.seed, module == Module::kVertex ? 1 : 2));
  if (module == Module::kVertex) {
    vertex_ = models::VertexModel<float>::create(store_, cfg_.model, init);
  } else {
    face_ = models::FaceModel<float>::create(store_, cfg_.model, init);
  }
}

const PreparedSample& Trainer::prepared(std::size_t index) {
  if (!cache_[index]) {
    cache_[index] = prepare_sample(data_[index], cfg_.model.voxel_grid, module_ == Module::kVertex);
  }
  if (!cfg_.augment.enabled) return *cache_[index];
  const DataSample aug = augment(data_[index], cfg_.augment, rng_);
  PreparedSample p = prepare_sample(aug, cfg_.model.voxel_grid, module_ == Module::kVertex);
  // Augmentations that merge lattice vertices change the target topology;
  // such draws fall back to the original sample.
  if (p.mesh.vertices.size() != cache_[index]->mesh.vertices.size() ||
      p.mesh.faces.size() != cache_[index]->mesh.faces.size()) {
    return *cache_[index];
  }
  scratch_ = std::move(p);
  return scratch_;
}

int Trainer::sample_loss(const PreparedSample& p, nn::Tape<float>& tape) const {
  const int loss = module_ == Module::kVertex ? vertex_.loss(tape, p.plan, p.vertex_tokens)
                                             : face_.loss(tape, p.mesh.vertices, p.face_tokens);
  return loss;
}

StepStats Trainer::step() {
  if (step_ >= cfg_.total_steps) throw Error("training already finished");
  store_.zero_grad();
  double total = 0.0;
  for (int b = 0; b < cfg_.batch_size; ++b) {
    if (cursor_ == order_.size()) {
      order_.resize(data_.size());
      for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    const std::size_t index = order_[cursor_++];
    const PreparedSample& p = prepared(index);
    nn::Tape<float> tape;
    tape.training = true;
    tape.dropout = cfg_.model.dropout;
    tape.rng = &rng_;
    const int loss = sample_loss(p, tape);
    const int scaled = nn::scale(tape, loss, 1.0f / static_cast<float>(cfg_.batch_size));
    const double value = tape.value(loss)(0, 0);
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "non-finite " << to_string(module_) << " loss at step " << step_ + 1 << " on sample " << p.name;
      throw Error(os.str());
    }
    total += value;
    tape.backward(scaled);
  }
  StepStats s;
  s.step = step_ + 1;
  s.lr = lr_schedule(step_, cfg_);
  s.loss = total / cfg_.batch_size;
  s.grad_norm = clip_grad_norm(store_, cfg_.max_grad_norm);
  s.clipped_norm = grad_norm(store_);
  adam_.update(store_, s.lr);
  ++step_;
  return s;
}

double Trainer::evaluate_loss(const std::vector<DataSample>& samples) const {
  if (samples.empty()) throw Error("no data");
  double total = 0.0;
  for (const DataSample& d : samples) {
    const PreparedSample p = prepare_sample(d, cfg_.model.voxel_grid, module_ == Module::kVertex);
    nn::Tape<float> tape;
    total += tape.value(sample_loss(p, tape))(0, 0);
  }
  return total / static_cast<double>(samples.size());
}

nlohmann::json Trainer::checkpoint_config() const {
  return nlohmann::json{{"module", to_string(module_)}, {"model", cfg_.model}, {"train", cfg_}, {"step", step_}};
}

void Trainer::save(const std::string& path) const { nn::save_checkpoint(path, checkpoint_config(), store_); }

void train(Trainer& trainer, const std::function<void(const StepStats&)>& on_step) {
  while (trainer.steps_done() < trainer.config().total_steps) {
    const StepStats s = trainer.step();
    if (on_step) on_step(s);
  }
}

namespace {

models::ModelConfig checked_config(const std::string& path, const char* module) {
  const nlohmann::json cfg = nn::read_checkpoint_config(path);
  if (cfg.value("module", std::string()) != module) {
    throw nn::CheckpointError(path + ": not a " + std::string(module) + " checkpoint");
  }
  return cfg.at("model").get<models::ModelConfig>();
}

}  // namespace

std::unique_ptr<LoadedVertexModel> load_vertex_model(const std::string& path) {
  auto out = std::make_unique<LoadedVertexModel>();
  Rng rng(0);
  out->model = models::VertexModel<float>::create(out->store, checked_config(path, "vertex"), rng);
  nn::load_checkpoint(path, out->store);
  return out;
}

std::unique_ptr<LoadedFaceModel> load_face_model(const std::string& path) {
  auto out = std::make_unique<LoadedFaceModel>();
  Rng rng(0);
  out->model = models::FaceModel<float>::create(out->store, checked_config(path, "face"), rng);
  nn::load_checkpoint(path, out->store);
  return out;
}

}  // namespace polybuild::training
