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

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.
//
//   acceptance [--only 1,2,...] [--artifacts DIR] [--cli PATH]
//
// Trained checkpoints are cached in the artifact directory under a hash of
// their full training configuration; training is deterministic, so a cached
// checkpoint is bit-identical to a fresh one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../support/fixtures.hpp"
#include "polybuild/codec.hpp"
#include "polybuild/constraints.hpp"
#include "polybuild/dataset.hpp"
#include "polybuild/generation.hpp"
#include "polybuild/gradcheck.hpp"
#include "polybuild/mesh_io.hpp"
#include "polybuild/metrics.hpp"
#include "polybuild/nn/checkpoint.hpp"
#include "polybuild/synthetic.hpp"
#include "polybuild/training.hpp"
#include "polybuild/validity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polybuild;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::vector<training::DataSample> as_data(const std::vector<synthetic::Sample>& samples) {
  std::vector<training::DataSample> out;
  for (const synthetic::Sample& s : samples) out.push_back({s.name, s.mesh, s.cloud});
  return out;
}

fs::path g_artifacts;
std::string g_cli;

// Trains (or loads from the cache) one module and returns the checkpoint path.
fs::path trained_checkpoint(const std::string& tag, training::Module module, const training::TrainConfig& cfg,
                            const json& corpus_id, const std::vector<training::DataSample>& data) {
  json key = {{"module", training::to_string(module)}, {"train", cfg}, {"corpus", corpus_id}};
  const std::string hash = models::hex_hash(models::config_hash(key));
  const fs::path path = g_artifacts / (tag + "_" + training::to_string(module) + "_" + hash + ".ckpt");
  if (fs::exists(path)) {
    std::cerr << "  [" << tag << "] using cached " << path.filename().string() << "\n";
    return path;
  }
  std::cerr << "  [" << tag << "] training " << training::to_string(module) << " for " << cfg.total_steps
            << " steps\n";
  const auto t0 = Clock::now();
  training::Trainer trainer(module, cfg, data);
  std::ostringstream log;
  log << "step,lr,loss,grad_norm,clipped_norm\n";
  training::train(trainer, [&](const training::StepStats& s) {
    log << s.step << "," << s.lr << "," << s.loss << "," << s.grad_norm << "," << s.clipped_norm << "\n";
    if (s.step % cfg.log_every == 0) {
      std::cerr << "  [" << tag << "] " << training::to_string(module) << " step " << s.step << " loss " << s.loss
                << " (" << fmt("%.0f", seconds_since(t0)) << " s)\n";
    }
  });
  write_file_atomic(g_artifacts / (tag + "_" + training::to_string(module) + "_" + hash + ".csv"), log.str());
  trainer.save(path.string());
  return path;
}

// ------------------------------------------------------------------------ 1

std::vector<synthetic::Sample> shared_corpus() {
  static const std::vector<synthetic::Sample> corpus = synthetic::generate_corpus(1000, 2026, {}, {}, 1);
  return corpus;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  const std::vector<synthetic::Sample> corpus = shared_corpus();
  int exact = 0;
  for (const synthetic::Sample& s : corpus) {
    const QuantizedMesh m = canonicalize(quantize(s.mesh, s.cloud));
    const std::vector<IVec3> v = decode_vertices(encode_vertices(m));
    const std::vector<Face> f = decode_faces(encode_faces(m), v.size());
    exact += (v == m.vertices && f == m.faces);
  }
  const double dt = seconds_since(t0);
  return {exact == 1000 && dt < 10.0,
          std::to_string(exact) + "/1000 exact round trips in " + fmt("%.2f", dt) + " s (incl. corpus generation)"};
}

// ------------------------------------------------------------------------ 2

bool admissible(const QuantizedMesh& m) {
  const TokenSequence vt = encode_vertices(m);
  VertexDecodeState vs(kMaxVertices);
  for (int t : vt) {
    if (!vertex_mask(vs)[t]) return false;
    vs.push(t);
  }
  const TokenSequence ft = encode_faces(m);
  FaceDecodeState fs(m.vertices.size(), kMaxFaces);
  for (int t : ft) {
    if (!face_mask(fs)[t]) return false;
    fs.push(t);
  }
  return true;
}

/// Uniform choice among admissible tokens, with the special tokens drawn at
/// fixed rates whenever they are admissible so rollouts stay short.
int fuzz_pick(const TokenMask& mask, const std::vector<std::pair<int, double>>& specials, Rng& rng) {
  for (const auto& [tok, p] : specials) {
    if (mask[tok] && bernoulli(rng, p)) return tok;
  }
  std::vector<int> valid;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) valid.push_back(static_cast<int>(i));
  }
  if (valid.empty()) return -1;
  return valid[uniform_index(rng, valid.size())];
}

Verdict criterion2() {
  int rejected = 0;
  for (const synthetic::Sample& s : shared_corpus()) {
    rejected += !admissible(canonicalize(quantize(s.mesh, s.cloud)));
  }
  Rng rng(derive_seed(2026, 2));
  int errors = 0, dead_ends = 0;
  const int rollouts = 100000;
  for (int r = 0; r < rollouts; ++r) {
    try {
      if (r % 2 == 0) {
        VertexDecodeState st(kMaxVertices);
        TokenSequence seq;
        while (!st.stopped()) {
          const int t = fuzz_pick(vertex_mask(st), {{kVertexStop, 0.03}}, rng);
          if (t < 0) {
            ++dead_ends;
            break;
          }
          seq.push_back(t);
          st.push(t);
        }
        if (st.stopped()) decode_vertices(seq);
      } else {
        const std::size_t n = 3 + uniform_index(rng, 40);
        FaceDecodeState st(n, kMaxFaces);
        TokenSequence seq;
        while (!st.stopped()) {
          const int t = fuzz_pick(face_mask(st), {{kFaceStop, 0.15}, {kFaceEnd, 0.3}}, rng);
          if (t < 0) {
            ++dead_ends;
            break;
          }
          seq.push_back(t);
          st.push(t);
        }
        if (st.stopped()) decode_faces(seq, n);
      }
    } catch (const CodecError&) {
      ++errors;
    }
  }
  return {rejected == 0 && errors == 0,
          std::to_string(rejected) + "/1000 ground-truth sequences masked; " + std::to_string(errors) +
              " decode errors in " + std::to_string(rollouts) + " constrained rollouts (" +
              std::to_string(dead_ends) + " dead ends)"};
}

// ------------------------------------------------------------------------ 3

Verdict criterion3() {
  Rng rng(derive_seed(2026, 3));
  int mismatches = 0;
  for (int p = 0; p < 100; ++p) {
    std::vector<Vec3> a(1 + uniform_index(rng, 200)), b(1 + uniform_index(rng, 200));
    for (Vec3& v : a) v = {uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
    for (Vec3& v : b) v = {uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
    mismatches += metrics::chamfer(a, b) != metrics::chamfer_brute_force(a, b);
    mismatches += metrics::hausdorff(a, b) != metrics::hausdorff_brute_force(a, b);
  }
  double worst = 0;
  auto expect = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const std::vector<Vec3> o = {{0, 0, 0}}, x = {{1, 0, 0}}, ox = {{1, 0, 0}, {0, 0, 0}};
  expect(metrics::chamfer(o, x), 2.0);
  expect(metrics::chamfer(ox, ox), 0.0);
  expect(metrics::hausdorff(o, ox), 1.0);
  expect(metrics::hausdorff(ox, o), 1.0);
  const metrics::MatchReport r = metrics::vertex_prf(o, std::vector<Vec3>{{0.5, 0, 0}, {3, 0, 0}});
  expect(r.precision, 0.5);
  expect(r.recall, 1.0);
  expect(r.f1, 2.0 / 3.0);
  expect(metrics::edge_distance({0, 0, 0}, {1, 0, 0}, {0, 0.25, 0}, {1, 0.25, 0}), 0.25);
  PolyMesh quad;
  quad.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  quad.faces = {{0, 1, 2, 3}};
  PolyMesh lifted = quad;
  for (Vec3& v : lifted.vertices) v.z += 0.7;
  expect(metrics::mde(quad, lifted, 1000, 1), 0.7);
  expect(metrics::mde(quad, quad, 1000, 1), 0.0);
  const PolyMesh cube = testing::box_mesh({0, 0, 0}, {1, 1, 1});
  const PolyMesh cube2 = testing::box_mesh({0, 0, 0}, {2, 2, 2});
  expect(metrics::count_errors(cube, cube2).area, 18.0);
  return {mismatches == 0 && worst <= 1e-9,
          std::to_string(mismatches) + " oracle mismatches over 100 pairs; max analytic error " + fmt("%.2e", worst)};
}

// ------------------------------------------------------------------------ 4

Verdict criterion4() {
  const GradCheckResult r = miniature_gradient_check(200, 1e-4, 2026);
  return {r.max_rel_error < 1e-5 && r.checked >= 200 && r.parameters <= 10000,
          "max relative error " + fmt("%.3e", r.max_rel_error) + " over " + std::to_string(r.checked) + " of " +
              std::to_string(r.parameters) + " parameters (worst " + r.worst + ")"};
}

// ------------------------------------------------------------------------ 5

training::TrainConfig overfit_config() {
  training::TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.total_steps = 1000;
  cfg.warmup_steps = 100;
  cfg.augment.enabled = false;
  cfg.seed = 5;
  cfg.log_every = 100;
  cfg.model.width = 64;
  cfg.model.heads = 4;
  cfg.model.ff = 128;
  cfg.model.layers = 2;
  cfg.model.face_encoder_layers = 2;
  cfg.model.dropout = 0.0;
  return cfg;
}

Verdict criterion5() {
  const std::vector<synthetic::Sample> corpus = synthetic::generate_corpus(10, 11, {}, {}, 1);
  const std::vector<training::DataSample> data = as_data(corpus);
  const training::TrainConfig cfg = overfit_config();
  const json corpus_id = {{"n", 10}, {"seed", 11}};
  const auto vm = training::load_vertex_model(
      trained_checkpoint("c5", training::Module::kVertex, cfg, corpus_id, data).string());
  const auto fm =
      training::load_face_model(trained_checkpoint("c5", training::Module::kFace, cfg, corpus_id, data).string());
  SamplerConfig sc;
  sc.greedy = true;
  int vertex_ok = 0, face_ok = 0;
  Rng rng(0);
  for (const training::DataSample& d : data) {
    const training::PreparedSample p = training::prepare_sample(d, cfg.model.voxel_grid, false);
    const models::ContextEmbeddings ctx = models::encode_point_cloud(p.normalized, vm->model.encoder, cfg.model.voxel_grid);
    vertex_ok += sample_vertices(vm->model, ctx, sc, rng).tokens == p.vertex_tokens;
    face_ok += sample_faces(fm->model, p.mesh.vertices, sc, rng).tokens == p.face_tokens;
  }
  return {vertex_ok >= 8 && face_ok >= 8, "greedy decoding reproduces " + std::to_string(vertex_ok) +
                                              "/10 vertex sequences and " + std::to_string(face_ok) +
                                              "/10 face sequences (" + std::to_string(cfg.total_steps) +
                                              " steps per module)"};
}

// ------------------------------------------------------------------------ 6

training::TrainConfig generalization_config() {
  training::TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.total_steps = 8000;
  cfg.warmup_steps = 200;
  cfg.seed = 6;
  cfg.log_every = 250;
  cfg.model.width = 128;
  cfg.model.heads = 4;
  cfg.model.ff = 512;
  cfg.model.layers = 3;
  cfg.model.face_encoder_layers = 3;
  cfg.model.dropout = 0.1;
  return cfg;
}

Verdict criterion6() {
  const std::size_t n_train = 2000, n_test = 200;
  const std::uint64_t train_seed = 6000, test_seed = 6001;
  const std::vector<training::DataSample> train = as_data(synthetic::generate_corpus(n_train, train_seed, {}, {}, 1));
  const std::vector<synthetic::Sample> test = synthetic::generate_corpus(n_test, test_seed, {}, {}, 1);
  const training::TrainConfig cfg = generalization_config();
  const json corpus_id = {{"n", n_train}, {"seed", train_seed}};
  const auto vm = training::load_vertex_model(
      trained_checkpoint("c6", training::Module::kVertex, cfg, corpus_id, train).string());
  const auto fm =
      training::load_face_model(trained_checkpoint("c6", training::Module::kFace, cfg, corpus_id, train).string());

  const auto t0 = Clock::now();
  int ok = 0;
  double chamfer = 0, baseline_ok = 0, baseline_all = 0;
  json rows = json::array();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const synthetic::Sample& s = test[i];
    SamplerConfig sc;
    sc.seed = derive_seed(test_seed, i);
    const GenerationOutcome g = reconstruct_mesh(s.cloud, vm->model, fm->model, sc);
    const double base =
        metrics::evaluate(s.mesh, metrics::bounding_box_mesh(s.cloud), metrics::kSurfaceSamples, derive_seed(66, i))
            .chamfer;
    baseline_all += base;
    json row = {{"name", s.name}, {"failure", to_string(g.failure)}, {"baseline_chamfer", base},
                {"vertex_calls", g.vertex_calls}, {"face_calls", g.face_calls}};
    if (g.world) {
      const double c = metrics::evaluate(s.mesh, *g.world, metrics::kSurfaceSamples, derive_seed(66, i)).chamfer;
      ++ok;
      chamfer += c;
      baseline_ok += base;
      row["chamfer"] = c;
    }
    rows.push_back(row);
  }
  const double rate = static_cast<double>(ok) / static_cast<double>(test.size());
  const double mean = ok ? chamfer / ok : INFINITY;
  const double base_mean = ok ? baseline_ok / ok : INFINITY;
  write_file_atomic(g_artifacts / "c6_results.json",
                    json{{"success_rate", rate},
                         {"mean_chamfer", mean},
                         {"baseline_mean_chamfer_same_set", base_mean},
                         {"baseline_mean_chamfer_all", baseline_all / test.size()},
                         {"reconstruction_seconds", seconds_since(t0)},
                         {"buildings", rows}}
                            .dump(2));
  return {rate >= 0.7 && mean < base_mean,
          "valid meshes " + std::to_string(ok) + "/" + std::to_string(test.size()) + " (" + fmt("%.1f", 100 * rate) +
              "%); mean Chamfer " + fmt("%.4f", mean) + " m vs bounding-box baseline " + fmt("%.4f", base_mean) +
              " m on the same buildings"};
}

// ------------------------------------------------------------------------ 7

Verdict criterion7() {
  const PolyMesh box = testing::unit_box();
  const PointCloud cloud = testing::surface_cloud(box);
  const testing::Scene good = testing::make_scene(box, cloud);
  const testing::Scene diag = testing::make_scene(testing::diagonal_wall_box({0, 0, 0}, {10, 8, 6}), cloud);
  const testing::Scene half = testing::make_scene(testing::box_mesh({0, 0, 0}, {5, 8, 6}), cloud);
  SamplerConfig cfg;
  std::vector<std::string> problems;

  {  // invalid (diagonal) faces, then valid faces
    testing::ScriptedProposer p;
    p.vertex_script = {testing::vertex_rollout(good.mesh)};
    p.face_script = {testing::face_rollout(diag.mesh), testing::face_rollout(good.mesh)};
    Rng rng(1);
    const GenerationOutcome g = run_rejection_loop(p, good.normalized, good.box, good.transform, cfg, rng);
    if (!g.mesh || g.vertex_calls != 1 || g.face_calls != 2) problems.push_back("diagonal-then-valid");
  }
  {  // missing floor vertices forever
    testing::ScriptedProposer p;
    p.vertex_script = {testing::vertex_rollout(half.mesh)};
    p.face_script = {testing::face_rollout(half.mesh)};
    Rng rng(1);
    const GenerationOutcome g = run_rejection_loop(p, good.normalized, good.box, good.transform, cfg, rng);
    if (g.mesh || g.failure != Failure::kExhausted || g.vertex_calls != 10 || g.face_calls != 10) {
      problems.push_back("exhausted");
    }
  }
  {  // valid first sample
    testing::ScriptedProposer p;
    p.vertex_script = {testing::vertex_rollout(good.mesh)};
    p.face_script = {testing::face_rollout(good.mesh)};
    Rng rng(1);
    const GenerationOutcome g = run_rejection_loop(p, good.normalized, good.box, good.transform, cfg, rng);
    if (!g.mesh || g.vertex_calls != 1 || g.face_calls != 1) problems.push_back("valid-first");
  }
  std::string detail = "3 scripted scenarios";
  for (const std::string& s : problems) detail += "; failed " + s;
  return {problems.empty(), detail};
}

// ------------------------------------------------------------------------ 8

Verdict criterion8() {
  const Vec3 lo{0, 0, 0}, hi{10, 8, 6};
  const PolyMesh box = testing::box_mesh(lo, hi);
  const PointCloud cloud = testing::surface_cloud(box);
  std::vector<std::string> problems;
  auto scene = [&](const PolyMesh& m) { return testing::make_scene(m, cloud); };

  const testing::Scene ok = scene(box);
  if (check_mesh(ok.mesh, ok.normalized) != Validity::kOk) problems.push_back("box");
  PolyMesh no_floor = box;
  no_floor.faces.erase(no_floor.faces.begin());
  const testing::Scene nf = scene(no_floor);
  if (check_floor_coverage(nf.mesh, nf.normalized) != FloorCoverage::kMissingFloorFaces) problems.push_back("no-floor");
  const testing::Scene half = scene(testing::box_mesh(lo, {5, 8, 6}));
  if (check_floor_coverage(half.mesh, half.normalized) != FloorCoverage::kMissingFloorVertices) {
    problems.push_back("half-footprint");
  }
  if (!check_floor_wall_connectivity(ok.mesh)) problems.push_back("closed-box-connectivity");
  PolyMesh no_wall = box;
  no_wall.faces.erase(no_wall.faces.begin() + 2);
  if (check_floor_wall_connectivity(scene(no_wall).mesh)) problems.push_back("missing-wall");
  if (check_floor_wall_connectivity(scene(testing::leaning_box(lo, hi, 3.0)).mesh)) problems.push_back("slanted");
  if (!check_no_diagonal_wall_edges(ok.mesh)) problems.push_back("rectangular-walls");
  const testing::Scene diag = scene(testing::diagonal_wall_box(lo, hi));
  if (check_no_diagonal_wall_edges(diag.mesh) || check_mesh(diag.mesh, diag.normalized) != Validity::kDiagonalWalls) {
    problems.push_back("diagonal-edge");
  }
  std::string detail = "box / missing-floor / half-footprint / missing-wall / slanted-neighbour / diagonal-edge";
  for (const std::string& s : problems) detail += "; misclassified " + s;
  return {problems.empty(), detail};
}

// ------------------------------------------------------------------------ 9

Verdict criterion9() {
  training::TrainConfig cfg;
  const double at0 = training::lr_schedule(0, cfg);
  const double at_warm = training::lr_schedule(cfg.warmup_steps, cfg);
  const double at_end = training::lr_schedule(cfg.total_steps, cfg);
  const bool schedule = std::abs(at0) <= 1e-12 && std::abs(at_warm - 3e-4) <= 1e-12 && std::abs(at_end) <= 1e-12;

  training::TrainConfig run;
  run.batch_size = 4;
  run.total_steps = 100;
  run.warmup_steps = 10;
  run.seed = 9;
  run.model.width = 32;
  run.model.heads = 2;
  run.model.ff = 64;
  run.model.layers = 1;
  run.model.face_encoder_layers = 1;
  run.model.voxel_grid = 64;
  run.model.encoder_channels = {8, 8, 16};
  const std::vector<training::DataSample> data = as_data(synthetic::generate_corpus(8, 9, {}, {}, 1));
  double worst = 0;
  int steps = 0;
  for (training::Module m : {training::Module::kVertex, training::Module::kFace}) {
    training::Trainer t(m, run, data);
    training::train(t, [&](const training::StepStats& s) {
      worst = std::max(worst, s.clipped_norm);
      ++steps;
    });
  }
  return {schedule && worst <= 1.0 + 1e-6 && steps == 200,
          "lr(0)=" + fmt("%.1e", at0) + " lr(warmup)=" + fmt("%.6e", at_warm) + " lr(total)=" + fmt("%.1e", at_end) +
              "; max clipped norm " + fmt("%.9f", worst) + " over " + std::to_string(steps) + " steps"};
}

// ----------------------------------------------------------------------- 10

std::string normalized_contents(const fs::path& p) {
  std::string s = read_file(p);
  if (p.extension() == ".json") {
    json j = json::parse(s);
    if (j.contains("timestamps")) j.erase("timestamps");
    s = j.dump();
  }
  return s;
}

Verdict criterion10() {
  if (g_cli.empty() || !fs::exists(g_cli)) return {false, "CLI binary not found"};
  const fs::path root = g_artifacts / "c10";
  fs::remove_all(root);
  const json tiny = {{"batch_size", 4},
                     {"warmup_steps", 50},
                     {"total_steps", 500},
                     {"log_every", 500},
                     {"checkpoint_every", 250},
                     {"model",
                      {{"width", 32},
                       {"heads", 2},
                       {"ff", 64},
                       {"layers", 1},
                       {"face_encoder_layers", 1},
                       {"voxel_grid", 64},
                       {"encoder_channels", {8, 8, 16}}}}};
  const json sampler = {{"max_vertex_iterations", 2}, {"max_face_iterations", 2}};
  for (const char* run : {"run1", "run2"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    write_file_atomic(dir / "train.json", tiny.dump());
    write_file_atomic(dir / "sampler.json", sampler.dump());
    const std::string jobs = std::string(run) == "run1" ? "1" : "2";
    const std::string cmd = "(cd '" + dir.string() + "' && '" + g_cli + "' gen-corpus --n 6 --seed 10 --out corpus" +
                            " && '" + g_cli + "' train --module vertex --corpus corpus --config train.json --seed 10" +
                            " --out models && '" + g_cli +
                            "' train --module face --corpus corpus --config train.json --seed 10 --out models && '" +
                            g_cli + "' reconstruct --input corpus --vertex-model models/vertex.ckpt" +
                            " --face-model models/face.ckpt --config sampler.json --seed 10 --jobs " + jobs +
                            " --out recon; test $? -le 1)";
    if (std::system((cmd + " 2>/dev/null").c_str()) != 0) return {false, std::string("pipeline failed in ") + run};
  }
  std::set<fs::path> files;
  for (const char* run : {"run1", "run2"}) {
    for (const auto& e : fs::recursive_directory_iterator(root / run)) {
      if (e.is_regular_file()) files.insert(fs::relative(e.path(), root / run));
    }
  }
  int differing = 0;
  for (const fs::path& f : files) {
    const fs::path a = root / "run1" / f, b = root / "run2" / f;
    if (!fs::exists(a) || !fs::exists(b) || normalized_contents(a) != normalized_contents(b)) {
      std::cerr << "  [c10] differs: " << f.string() << "\n";
      ++differing;
    }
  }
  return {differing == 0 && !files.empty(),
          std::to_string(files.size()) + " output files compared, " + std::to_string(differing) +
              " differ (manifest timestamps excluded; reconstruct ran with 1 and 2 jobs)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  g_artifacts = "acceptance_artifacts";
#ifdef POLYBUILD_CLI_PATH
  g_cli = POLYBUILD_CLI_PATH;
#endif
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      for (std::string t; std::getline(s, t, ',');) only.insert(std::stoi(t));
    } else if (a == "--artifacts" && i + 1 < argc) {
      g_artifacts = argv[++i];
    } else if (a == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--artifacts DIR] [--cli PATH]\n";
      return 2;
    }
  }
  fs::create_directories(g_artifacts);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"codec round-trip", criterion1},        {"constraint admissibility", criterion2},
      {"metric oracles", criterion3},          {"gradient check", criterion4},
      {"overfit oracle", criterion5},          {"generalization smoke test", criterion6},
      {"generation control flow", criterion7}, {"validity-check suite", criterion8},
      {"schedule correctness", criterion9},    {"determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << "criterion " << id << " [" << criteria[i].first << "]: " << (v.pass ? "PASS" : "FAIL") << " - "
              << v.detail << " (" << fmt("%.1f", seconds_since(t0)) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
