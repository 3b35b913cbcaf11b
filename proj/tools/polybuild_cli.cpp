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

// polybuild: corpus generation, tokenization, training, reconstruction,
// evaluation and validity checks behind one entry point.
//
// Exit codes: 0 success, 1 domain failure, 2 usage or I/O error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polybuild/codec.hpp"
#include "polybuild/dataset.hpp"
#include "polybuild/generation.hpp"
#include "polybuild/geometry.hpp"
#include "polybuild/gradcheck.hpp"
#include "polybuild/mesh_io.hpp"
#include "polybuild/metrics.hpp"
#include "polybuild/models/config.hpp"
#include "polybuild/random.hpp"
#include "polybuild/synthetic.hpp"
#include "polybuild/training.hpp"
#include "polybuild/validity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polybuild;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Usage-level problems detected after parsing (bad pairing, missing input).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

/// Registers the shared flags; returns the --out option.
CLI::Option* add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
  cmd->add_option("--config", c.config, "JSON config file; omitted keys take defaults")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  return cmd->add_option("--out", c.out, out_help);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

/// One manifest per command run.
struct Manifest {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  json inputs = json::array();
  json outputs = json::array();
  std::string started = utc_now();
  json outcome = json::object();

  json to_json() const {
    return {{"command", command},
            {"config", config},
            {"config_hash", models::hex_hash(models::config_hash(config))},
            {"seed", seed},
            {"inputs", inputs},
            {"outputs", outputs},
            {"timestamps", {{"started", started}, {"finished", utc_now()}}},
            {"outcome", outcome}};
  }
  /// Writes to `path`, or to standard error when no path is known.
  void write(const fs::path& path) const {
    if (path.empty()) {
      std::cerr << to_json().dump() << "\n";
    } else {
      write_file_atomic(path, to_json().dump(2) + "\n");
    }
  }
};

fs::path sibling(const fs::path& file, const std::string& suffix) {
  return file.parent_path() / (file.stem().string() + suffix);
}

/// Runs body(i) for i in [0, n) on `jobs` threads; rethrows the first error.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> list_stems(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::uint64_t name_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) h = (h ^ c) * 1099511628211ull;
  return derive_seed(seed, h);
}

// ---------------------------------------------------------------- gen-corpus

struct GenCorpusArgs {
  Common common;
  std::size_t n = 0;
};

int run_gen_corpus(const GenCorpusArgs& a) {
  const json raw = load_config(a.common.config);
  synthetic::BuildingOptions options = raw.value("building", json::object()).get<synthetic::BuildingOptions>();
  synthetic::ScanSpec scan = raw.value("scan", json::object()).get<synthetic::ScanSpec>();
  scan.validate();
  const fs::path dir = a.common.out;
  fs::create_directories(dir);

  Manifest m;
  m.command = "gen-corpus";
  m.config = {{"n", a.n}, {"building", options}, {"scan", scan}};
  m.seed = a.common.seed;

  const std::vector<synthetic::Sample> samples =
      synthetic::generate_corpus(a.n, a.common.seed, options, scan, a.common.jobs);
  json entries = json::array();
  std::size_t attempts = 0;
  for (const synthetic::Sample& s : samples) {
    write_mesh(training::mesh_path(dir, s.name), s.mesh);
    write_cloud(training::cloud_path(dir, s.name), s.cloud);
    entries.push_back({{"name", s.name},
                       {"seed", s.seed},
                       {"attempts", s.attempts},
                       {"spec", s.spec},
                       {"vertices", s.mesh.vertices.size()},
                       {"faces", s.mesh.faces.size()},
                       {"points", s.cloud.points.size()}});
    m.outputs.push_back(training::mesh_path(dir, s.name).filename().string());
    m.outputs.push_back(training::cloud_path(dir, s.name).filename().string());
    attempts += s.attempts;
  }
  m.outcome = {{"samples", samples.size()}, {"attempts", attempts}};
  json manifest = m.to_json();
  manifest["samples"] = entries;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cerr << "gen-corpus: wrote " << samples.size() << " samples to " << dir.string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ tokenize

struct TokenizeArgs {
  Common common;
  std::vector<std::string> meshes;
  std::vector<std::string> clouds;
  std::string corpus;
};

std::string token_line(const PolyMesh& mesh, const PointCloud& cloud) {
  const QuantizedMesh q = canonicalize(quantize(mesh, cloud));
  std::ostringstream s;
  bool first = true;
  for (const TokenSequence& seq : {encode_vertices(q), encode_faces(q)}) {
    for (int t : seq) {
      s << (first ? "" : " ") << t;
      first = false;
    }
  }
  return s.str();
}

int run_tokenize(const TokenizeArgs& a) {
  Manifest m;
  m.command = "tokenize";
  m.config = load_config(a.common.config);
  m.seed = a.common.seed;
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (!a.corpus.empty()) {
    for (const std::string& name : list_stems(a.corpus, ".obj")) {
      pairs.emplace_back(training::mesh_path(a.corpus, name), training::cloud_path(a.corpus, name));
    }
  }
  if (!a.clouds.empty() && a.clouds.size() != a.meshes.size()) {
    throw UsageError("tokenize: --cloud must be given once per --mesh or not at all");
  }
  for (std::size_t i = 0; i < a.meshes.size(); ++i) {
    pairs.emplace_back(a.meshes[i], a.clouds.empty() ? fs::path() : fs::path(a.clouds[i]));
  }
  if (pairs.empty()) throw UsageError("tokenize: no input meshes");

  std::string text;
  for (const auto& [mesh_file, cloud_file] : pairs) {
    const PolyMesh mesh = read_mesh(mesh_file);
    PointCloud cloud;
    if (!cloud_file.empty() && fs::exists(cloud_file)) {
      cloud = read_cloud(cloud_file);
      m.inputs.push_back(cloud_file.string());
    } else {
      cloud.points = mesh.vertices;  // lattice spans the mesh itself
    }
    m.inputs.push_back(mesh_file.string());
    text += token_line(mesh, cloud) + "\n";
  }
  m.outcome = {{"meshes", pairs.size()}};
  if (a.common.out.empty()) {
    std::cout << text;
    m.write({});
  } else {
    write_file_atomic(a.common.out, text);
    m.outputs.push_back(a.common.out);
    m.write(sibling(a.common.out, ".manifest.json"));
  }
  return kExitOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string module;
  std::string corpus;
  int steps = 0;
  bool seed_given = false;
};

int run_train(const TrainArgs& a) {
  const training::Module module = training::module_from_string(a.module);
  training::TrainConfig cfg = load_config(a.common.config).get<training::TrainConfig>();
  if (a.seed_given) cfg.seed = a.common.seed;
  if (a.steps > 0) cfg.total_steps = a.steps;
  cfg.warmup_steps = std::min(cfg.warmup_steps, cfg.total_steps);
  cfg.validate();

  const fs::path dir = a.common.out;
  fs::create_directories(dir);
  Manifest m;
  m.command = std::string("train --module ") + training::to_string(module);
  m.config = cfg;
  m.seed = cfg.seed;
  m.inputs.push_back(a.corpus);

  training::Trainer trainer(module, cfg, training::load_corpus(a.corpus));
  const std::string tag = training::to_string(module);
  std::ostringstream log;
  log << "step,lr,loss,grad_norm,clipped_norm\n" << std::setprecision(9);
  double last_loss = 0;
  training::train(trainer, [&](const training::StepStats& s) {
    log << s.step << "," << s.lr << "," << s.loss << "," << s.grad_norm << "," << s.clipped_norm << "\n";
    last_loss = s.loss;
    if (cfg.log_every > 0 && (s.step % cfg.log_every == 0 || s.step == cfg.total_steps)) {
      std::cerr << "train " << tag << ": step " << s.step << " lr " << s.lr << " loss " << s.loss << "\n";
    }
    if (cfg.checkpoint_every > 0 && s.step % cfg.checkpoint_every == 0 && s.step < cfg.total_steps) {
      const fs::path p = dir / (tag + "_step" + std::to_string(s.step) + ".ckpt");
      trainer.save(p.string());
      m.outputs.push_back(p.filename().string());
    }
  });
  const fs::path final_path = dir / (tag + ".ckpt");
  trainer.save(final_path.string());
  write_file_atomic(dir / (tag + "_metrics.csv"), log.str());
  m.outputs.push_back(final_path.filename().string());
  m.outputs.push_back(tag + "_metrics.csv");
  m.outcome = {{"steps", trainer.steps_done()}, {"final_loss", last_loss}};
  m.write(dir / (tag + "_manifest.json"));
  return kExitOk;
}

// --------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  Common common;
  std::string input;
  std::string vertex_model;
  std::string face_model;
  bool greedy = false;
};

json outcome_report(const GenerationOutcome& g, std::uint64_t seed) {
  json history = json::array();
  for (std::size_t i = 0; i < g.history.size(); ++i) {
    history.push_back({{"failure", to_string(g.history[i])}, {"detail", g.details[i]}});
  }
  json r = {{"success", g.mesh.has_value()},
            {"failure", to_string(g.failure)},
            {"seed", seed},
            {"vertex_iterations", g.vertex_calls},
            {"face_iterations", g.face_calls},
            {"rejections", history}};
  if (g.world) r["mesh"] = {{"vertices", g.world->vertices.size()}, {"faces", g.world->faces.size()}};
  return r;
}

int run_reconstruct(const ReconstructArgs& a) {
  SamplerConfig cfg = load_config(a.common.config).get<SamplerConfig>();
  if (a.greedy) cfg.greedy = true;
  cfg.validate();
  const auto vm = training::load_vertex_model(a.vertex_model);
  const auto fm = training::load_face_model(a.face_model);
  if (a.common.out.empty()) throw UsageError("reconstruct: --out is required");

  Manifest m;
  m.command = "reconstruct";
  m.seed = a.common.seed;
  m.config = cfg;
  m.config.erase("seed");
  m.config["models"] = {{"vertex", models::hex_hash(models::config_hash(vm->model.cfg))},
                        {"face", models::hex_hash(models::config_hash(fm->model.cfg))}};
  m.inputs = {a.vertex_model, a.face_model};

  auto reconstruct_one = [&](const fs::path& cloud_file, std::uint64_t seed, const fs::path& mesh_out,
                             const fs::path& report_out) {
    SamplerConfig c = cfg;
    c.seed = seed;
    const GenerationOutcome g = reconstruct_mesh(read_cloud(cloud_file), vm->model, fm->model, c);
    json report = outcome_report(g, seed);
    report["input"] = cloud_file.string();
    if (g.world) write_mesh(mesh_out, *g.world);
    write_file_atomic(report_out, report.dump(2) + "\n");
    return g.failure;
  };

  const fs::path input = a.input;
  if (!fs::is_directory(input)) {
    if (!fs::exists(input)) throw UsageError("reconstruct: no such input " + input.string());
    const fs::path out = a.common.out;
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    const fs::path report = sibling(out, ".report.json");
    const Failure f = reconstruct_one(input, a.common.seed, out, report);
    m.inputs.push_back(input.string());
    if (f == Failure::kNone) m.outputs.push_back(out.string());
    m.outputs.push_back(report.string());
    m.outcome = {{"success", f == Failure::kNone}, {"failure", to_string(f)}};
    m.write(sibling(out, ".manifest.json"));
    std::cerr << "reconstruct: " << (f == Failure::kNone ? "ok" : to_string(f)) << "\n";
    return f == Failure::kNone ? kExitOk : kExitFailure;
  }

  const fs::path dir = a.common.out;
  fs::create_directories(dir);
  const std::vector<std::string> names = list_stems(input, ".xyz");
  if (names.empty()) throw UsageError("reconstruct: no .xyz files in " + input.string());
  std::vector<Failure> failures(names.size());
  parallel_for(names.size(), a.common.jobs, [&](std::size_t i) {
    const std::string& n = names[i];
    failures[i] = reconstruct_one(training::cloud_path(input, n), name_seed(a.common.seed, n),
                                  training::mesh_path(dir, n), dir / (n + ".report.json"));
  });
  std::map<std::string, int> tally;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    m.inputs.push_back(training::cloud_path(input, names[i]).string());
    if (failures[i] == Failure::kNone) {
      ++ok;
      m.outputs.push_back(names[i] + ".obj");
    }
    m.outputs.push_back(names[i] + ".report.json");
    ++tally[to_string(failures[i])];
  }
  m.outcome = {{"buildings", names.size()}, {"succeeded", ok}, {"by_failure", tally}};
  m.write(dir / "manifest.json");
  std::cerr << "reconstruct: " << ok << "/" << names.size() << " valid meshes\n";
  return ok > 0 ? kExitOk : kExitFailure;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateArgs {
  Common common;
  std::string gt;
  std::string pred;
  bool sweep = false;
  bool baseline = false;
  bool allow_missing = false;
};

struct EvalConfig {
  std::size_t samples = metrics::kSurfaceSamples;
  double threshold = metrics::kMatchThreshold;
  std::vector<double> sweep_thresholds;
};

EvalConfig eval_config(const json& j) {
  EvalConfig c;
  c.samples = j.value("samples", c.samples);
  c.threshold = j.value("threshold", c.threshold);
  if (j.contains("sweep_thresholds")) {
    c.sweep_thresholds = j["sweep_thresholds"].get<std::vector<double>>();
  } else {
    for (int i = 1; i <= 12; ++i) c.sweep_thresholds.push_back(0.25 * i);
  }
  if (c.samples == 0 || c.threshold <= 0) throw UsageError("evaluate: bad config");
  return c;
}

struct BuildingEval {
  std::string status;  // "ok", "failed"
  metrics::Evaluation eval;
  std::vector<metrics::SweepRow> sweep;
  double baseline_chamfer = 0;
};

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

int run_evaluate(const EvaluateArgs& a) {
  const json raw = load_config(a.common.config);
  const EvalConfig cfg = eval_config(raw);
  if (a.common.out.empty()) throw UsageError("evaluate: --out is required");
  const fs::path gt_dir = a.gt, pred_dir = a.pred, out = a.common.out;
  const std::vector<std::string> names = list_stems(gt_dir, ".obj");
  for (const std::string& n : list_stems(pred_dir, ".obj")) {
    if (!std::binary_search(names.begin(), names.end(), n)) {
      throw UsageError("evaluate: prediction " + n + " has no ground truth");
    }
  }
  // A ground-truth building without a predicted mesh is a failed
  // reconstruction only when the reconstruction left a report behind.
  for (const std::string& n : names) {
    if (!fs::exists(training::mesh_path(pred_dir, n)) && !fs::exists(pred_dir / (n + ".report.json")) &&
        !a.allow_missing) {
      throw UsageError("evaluate: ground truth " + n + " has no prediction");
    }
  }
  if (names.empty()) throw UsageError("evaluate: no ground-truth meshes in " + gt_dir.string());
  fs::create_directories(out);

  std::vector<BuildingEval> rows(names.size());
  parallel_for(names.size(), a.common.jobs, [&](std::size_t i) {
    const std::string& n = names[i];
    const PolyMesh gt = read_mesh(training::mesh_path(gt_dir, n));
    BuildingEval& r = rows[i];
    if (a.baseline) {
      const PolyMesh box = metrics::bounding_box_mesh(read_cloud(training::cloud_path(gt_dir, n)));
      r.baseline_chamfer = metrics::evaluate(gt, box, cfg.samples, name_seed(a.common.seed, n), cfg.threshold).chamfer;
    }
    if (!fs::exists(training::mesh_path(pred_dir, n))) {
      r.status = "failed";
      return;
    }
    const PolyMesh pred = read_mesh(training::mesh_path(pred_dir, n));
    r.status = "ok";
    r.eval = metrics::evaluate(gt, pred, cfg.samples, name_seed(a.common.seed, n), cfg.threshold);
    if (a.sweep) r.sweep = metrics::sweep(gt, pred, cfg.sweep_thresholds);
  });

  std::ostringstream csv;
  csv << std::setprecision(9);
  csv << "name,status,chamfer,hausdorff,mde,vertex_precision,vertex_recall,vertex_f1,edge_precision,edge_recall,"
         "edge_f1,vertex_count_error,face_count_error,edge_length_error,area_error"
      << (a.baseline ? ",baseline_chamfer" : "") << "\n";
  std::vector<double> chamfer, hausdorff, mde, vp, vr, vf, ep, er, ef, dv, df, dl, da, base_ok, base_all;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const BuildingEval& r = rows[i];
    const metrics::Evaluation& e = r.eval;
    if (a.baseline) base_all.push_back(r.baseline_chamfer);
    if (r.status != "ok") {
      csv << names[i] << "," << r.status << ",,,,,,,,,,,,," << (a.baseline ? "," : "");
      if (a.baseline) csv << r.baseline_chamfer;
      csv << "\n";
      continue;
    }
    csv << names[i] << ",ok," << e.chamfer << "," << e.hausdorff << "," << e.mde << "," << e.vertex.precision << ","
        << e.vertex.recall << "," << e.vertex.f1 << "," << e.edge.precision << "," << e.edge.recall << ","
        << e.edge.f1 << "," << e.counts.vertices << "," << e.counts.faces << "," << e.counts.edge_length << ","
        << e.counts.area;
    if (a.baseline) csv << "," << r.baseline_chamfer;
    csv << "\n";
    chamfer.push_back(e.chamfer);
    hausdorff.push_back(e.hausdorff);
    mde.push_back(e.mde);
    vp.push_back(e.vertex.precision);
    vr.push_back(e.vertex.recall);
    vf.push_back(e.vertex.f1);
    ep.push_back(e.edge.precision);
    er.push_back(e.edge.recall);
    ef.push_back(e.edge.f1);
    dv.push_back(e.counts.vertices);
    df.push_back(e.counts.faces);
    dl.push_back(e.counts.edge_length);
    da.push_back(e.counts.area);
    if (a.baseline) base_ok.push_back(r.baseline_chamfer);
  }
  write_file_atomic(out / "per_building.csv", csv.str());

  std::ostringstream hist;
  hist << "metric,bin_lo,bin_hi,count\n";
  const std::vector<std::tuple<std::string, const std::vector<double>*, double>> hists = {
      {"vertex_count_error", &dv, 1.0}, {"face_count_error", &df, 1.0},
      {"edge_length_error", &dl, 5.0},  {"area_error", &da, 25.0}};
  for (const auto& [label, values, width] : hists) {
    for (const metrics::HistogramBin& b : metrics::histogram(*values, width, 20)) {
      hist << label << "," << b.lo << "," << b.hi << "," << b.count << "\n";
    }
  }
  write_file_atomic(out / "histograms.csv", hist.str());

  const std::size_t evaluated = chamfer.size();
  json summary = {{"buildings", names.size()},
                  {"evaluated", evaluated},
                  {"failed", names.size() - evaluated},
                  {"success_rate", static_cast<double>(evaluated) / static_cast<double>(names.size())},
                  {"threshold", cfg.threshold},
                  {"surface_samples", cfg.samples},
                  {"mean",
                   {{"chamfer", mean_of(chamfer)},
                    {"hausdorff", mean_of(hausdorff)},
                    {"mde", mean_of(mde)},
                    {"vertex_precision", mean_of(vp)},
                    {"vertex_recall", mean_of(vr)},
                    {"vertex_f1", mean_of(vf)},
                    {"edge_precision", mean_of(ep)},
                    {"edge_recall", mean_of(er)},
                    {"edge_f1", mean_of(ef)},
                    {"vertex_count_error", mean_of(dv)},
                    {"face_count_error", mean_of(df)},
                    {"edge_length_error", mean_of(dl)},
                    {"area_error", mean_of(da)}}}};
  if (a.baseline) {
    summary["baseline"] = {{"mean_chamfer_evaluated", mean_of(base_ok)}, {"mean_chamfer_all", mean_of(base_all)}};
  }
  std::vector<std::string> outputs = {"per_building.csv", "histograms.csv", "summary.json"};
  if (a.sweep) {
    std::ostringstream s;
    s << std::setprecision(9) << "threshold,vertex_f1,edge_f1\n";
    json table = json::array();
    for (std::size_t t = 0; t < cfg.sweep_thresholds.size(); ++t) {
      std::vector<double> v, e;
      for (const BuildingEval& r : rows) {
        if (r.status != "ok") continue;
        v.push_back(r.sweep[t].vertex_f1);
        e.push_back(r.sweep[t].edge_f1);
      }
      s << cfg.sweep_thresholds[t] << "," << mean_of(v) << "," << mean_of(e) << "\n";
      table.push_back({{"threshold", cfg.sweep_thresholds[t]}, {"vertex_f1", mean_of(v)}, {"edge_f1", mean_of(e)}});
    }
    write_file_atomic(out / "sweep.csv", s.str());
    summary["sweep"] = table;
    outputs.push_back("sweep.csv");
  }
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");

  Manifest m;
  m.command = "evaluate";
  m.config = {{"samples", cfg.samples},
              {"threshold", cfg.threshold},
              {"sweep_thresholds", cfg.sweep_thresholds},
              {"sweep", a.sweep},
              {"baseline", a.baseline},
              {"allow_missing", a.allow_missing}};
  m.seed = a.common.seed;
  m.inputs = {a.gt, a.pred};
  m.outputs = outputs;
  m.outcome = {{"evaluated", evaluated}, {"buildings", names.size()}};
  m.write(out / "manifest.json");
  std::cerr << "evaluate: " << evaluated << "/" << names.size() << " buildings evaluated\n";
  return kExitOk;
}

// --------------------------------------------------------------------- check

struct CheckArgs {
  Common common;
  std::string mesh;
  std::string cloud;
};

int run_check(const CheckArgs& a) {
  const PolyMesh mesh = read_mesh(a.mesh);
  const PointCloud cloud = read_cloud(a.cloud);
  const auto [normalized, transform] = normalize(cloud);
  const LatticeBox box = bounding_box(normalized);
  const QuantizedMesh q = canonicalize(quantize(mesh, transform, box));
  const Validity v = check_mesh(q, normalized);

  std::map<std::string, int> classes;
  for (FaceClass c : classify_faces(q)) ++classes[to_string(c)];
  const json report = {{"validity", to_string(v)},
                       {"valid", v == Validity::kOk},
                       {"floor_coverage", to_string(check_floor_coverage(q, normalized))},
                       {"floor_coverage_fraction", floor_coverage_fraction(q, normalized)},
                       {"floor_wall_connectivity", check_floor_wall_connectivity(q)},
                       {"no_diagonal_wall_edges", check_no_diagonal_wall_edges(q)},
                       {"vertices", q.vertices.size()},
                       {"faces", q.faces.size()},
                       {"face_classes", classes}};
  Manifest m;
  m.command = "check";
  m.config = load_config(a.common.config);
  m.seed = a.common.seed;
  m.inputs = {a.mesh, a.cloud};
  m.outcome = {{"validity", to_string(v)}};
  if (a.common.out.empty()) {
    std::cout << report.dump(2) << "\n";
    m.write({});
  } else {
    write_file_atomic(a.common.out, report.dump(2) + "\n");
    m.outputs.push_back(a.common.out);
    m.write(sibling(a.common.out, ".manifest.json"));
  }
  return v == Validity::kOk ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- grad-check

struct GradCheckArgs {
  Common common;
  int samples = 200;
  double epsilon = 1e-4;
  double tolerance = 1e-5;
};

int run_grad_check(const GradCheckArgs& a) {
  const GradCheckResult model = miniature_gradient_check(a.samples, a.epsilon, a.common.seed);
  const GradCheckResult linear = linear_gradient_check(a.samples, a.epsilon, a.common.seed);
  const bool pass = model.max_rel_error < a.tolerance && linear.max_rel_error < a.tolerance;
  auto to_json = [](const GradCheckResult& r) {
    return json{{"max_relative_error", r.max_rel_error},
                {"max_absolute_error", r.max_abs_error},
                {"checked", r.checked},
                {"parameters", r.parameters},
                {"worst", r.worst}};
  };
  const json report = {{"pass", pass}, {"tolerance", a.tolerance}, {"model", to_json(model)},
                       {"linear", to_json(linear)}};
  Manifest m;
  m.command = "grad-check";
  m.config = {{"samples", a.samples},
              {"epsilon", a.epsilon},
              {"tolerance", a.tolerance},
              {"model", miniature_config()}};
  m.seed = a.common.seed;
  m.outcome = {{"pass", pass}, {"max_relative_error", model.max_rel_error}};
  if (a.common.out.empty()) {
    std::cout << report.dump(2) << "\n";
    m.write({});
  } else {
    write_file_atomic(a.common.out, report.dump(2) + "\n");
    m.outputs.push_back(a.common.out);
    m.write(sibling(a.common.out, ".manifest.json"));
  }
  return pass ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polybuild: polygonal building reconstruction from airborne point clouds", "polybuild"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "polybuild 0.1.0");

  GenCorpusArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-corpus", "Generate paired synthetic building meshes and scans");
  add_common(gen_cmd, gen.common, "Output directory")->required();
  gen_cmd->add_option("--n", gen.n, "Number of buildings")->required()->check(CLI::PositiveNumber);

  TokenizeArgs tok;
  CLI::App* tok_cmd = app.add_subcommand("tokenize", "Print vertex then face tokens, one mesh per line");
  add_common(tok_cmd, tok.common, "Output file (default: standard output)");
  tok_cmd->add_option("--mesh", tok.meshes, "Mesh file (OBJ); repeatable")->check(CLI::ExistingFile);
  tok_cmd->add_option("--cloud", tok.clouds, "Point cloud fixing the lattice, one per --mesh");
  tok_cmd->add_option("--corpus", tok.corpus, "Corpus directory of NAME.obj / NAME.xyz pairs")
      ->check(CLI::ExistingDirectory);

  TrainArgs tr;
  CLI::App* tr_cmd = app.add_subcommand("train", "Train the vertex or the face module");
  add_common(tr_cmd, tr.common, "Output directory for checkpoints and logs")->required();
  tr_cmd->add_option("--module", tr.module, "Module to train")->required()->check(CLI::IsMember({"vertex", "face"}));
  tr_cmd->add_option("--corpus", tr.corpus, "Training corpus directory")->required()->check(CLI::ExistingDirectory);
  tr_cmd->add_option("--steps", tr.steps, "Override the configured total step count")->check(CLI::PositiveNumber);

  ReconstructArgs rec;
  CLI::App* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct meshes from point clouds");
  add_common(rec_cmd, rec.common, "Mesh file, or output directory when --input is a directory")->required();
  rec_cmd->add_option("--input", rec.input, "Point cloud file (XYZ) or directory of NAME.xyz")->required();
  rec_cmd->add_option("--vertex-model", rec.vertex_model, "Vertex module checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  rec_cmd->add_option("--face-model", rec.face_model, "Face module checkpoint")->required()->check(CLI::ExistingFile);
  rec_cmd->add_flag("--greedy", rec.greedy, "Take the masked argmax instead of nucleus sampling");

  EvaluateArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("evaluate", "Compare predicted meshes against ground truth");
  add_common(ev_cmd, ev.common, "Output directory for summary.json and CSV tables")->required();
  ev_cmd->add_option("--gt", ev.gt, "Ground-truth directory (NAME.obj, NAME.xyz)")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev_cmd->add_option("--pred", ev.pred, "Prediction directory (NAME.obj, NAME.report.json)")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev_cmd->add_flag("--sweep", ev.sweep, "Also write F1-vs-threshold tables");
  ev_cmd->add_flag("--baseline", ev.baseline, "Also score the bounding-box mesh of each ground-truth cloud");
  ev_cmd->add_flag("--allow-missing", ev.allow_missing, "Count unpaired ground truth as failed reconstructions");

  CheckArgs chk;
  CLI::App* chk_cmd = app.add_subcommand("check", "Run the validity checks on an existing mesh");
  add_common(chk_cmd, chk.common, "Report file (default: standard output)");
  chk_cmd->add_option("--mesh", chk.mesh, "Mesh file (OBJ)")->required()->check(CLI::ExistingFile);
  chk_cmd->add_option("--cloud", chk.cloud, "Point cloud the mesh was built from (XYZ)")
      ->required()
      ->check(CLI::ExistingFile);

  GradCheckArgs gc;
  CLI::App* gc_cmd = app.add_subcommand("grad-check", "Finite-difference gradient check of a miniature model");
  add_common(gc_cmd, gc.common, "Report file (default: standard output)");
  gc_cmd->add_option("--samples", gc.samples, "Parameters to probe")->capture_default_str()->check(CLI::PositiveNumber);
  gc_cmd->add_option("--epsilon", gc.epsilon, "Central-difference step")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  }
  tr.seed_given = tr_cmd->count("--seed") > 0;

  try {
    if (gen_cmd->parsed()) return run_gen_corpus(gen);
    if (tok_cmd->parsed()) return run_tokenize(tok);
    if (tr_cmd->parsed()) return run_train(tr);
    if (rec_cmd->parsed()) return run_reconstruct(rec);
    if (ev_cmd->parsed()) return run_evaluate(ev);
    if (chk_cmd->parsed()) return run_check(chk);
    if (gc_cmd->parsed()) return run_grad_check(gc);
  } catch (const std::exception& e) {
    std::cerr << "polybuild: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
