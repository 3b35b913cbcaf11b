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

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "polybuild/mesh_io.hpp"

namespace polybuild {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string("\"") + POLYBUILD_CLI_PATH + "\" " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class HelpGolden : public ::testing::TestWithParam<std::string> {};

TEST_P(HelpGolden, MatchesGoldenFile) {
  const std::string sub = GetParam();
  const RunResult r = run(sub.empty() ? "--help" : sub + " --help");
  EXPECT_EQ(r.code, 0);
  const fs::path golden = fs::path(POLYBUILD_GOLDEN_DIR) / ((sub.empty() ? "polybuild" : sub) + ".help.txt");
  ASSERT_TRUE(fs::exists(golden)) << golden;
  EXPECT_EQ(r.out, read_file(golden));
}

INSTANTIATE_TEST_SUITE_P(Subcommands, HelpGolden,
                         ::testing::Values("", "gen-corpus", "tokenize", "train", "reconstruct", "evaluate", "check",
                                           "grad-check"),
                         [](const auto& info) {
                           std::string n = info.param.empty() ? "top" : info.param;
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

class CliExitCodes : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("polybuild_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

TEST_F(CliExitCodes, UsageErrorsAreTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("train --module vertex").code, 2);
  EXPECT_EQ(run("train --module sideways --corpus " + path("nowhere") + " --out " + path("o")).code, 2);
  EXPECT_EQ(run("check --mesh " + path("missing.obj") + " --cloud " + path("missing.xyz")).code, 2);
  EXPECT_EQ(run("gen-corpus --n 1 --out " + path("c") + " --config " + path("missing.json")).code, 2);
}

TEST_F(CliExitCodes, CheckSeparatesValidAndInvalidMeshes) {
  const PolyMesh box = testing::unit_box();
  write_mesh(fs::path(path("box.obj")), box);
  write_cloud(fs::path(path("box.xyz")), testing::surface_cloud(box));
  PolyMesh roofless = box;
  roofless.faces.erase(roofless.faces.begin());
  write_mesh(fs::path(path("open.obj")), roofless);
  const RunResult ok = run("check --mesh " + path("box.obj") + " --cloud " + path("box.xyz"));
  EXPECT_EQ(ok.code, 0);
  const nlohmann::json report = nlohmann::json::parse(ok.out);
  EXPECT_EQ(report["validity"], "ok");
  EXPECT_EQ(run("check --mesh " + path("open.obj") + " --cloud " + path("box.xyz")).code, 1);
}

TEST_F(CliExitCodes, TokenizeRoundTripsAndGenCorpusIsSeeded) {
  ASSERT_EQ(run("gen-corpus --n 2 --seed 4 --out " + path("a")).code, 0);
  ASSERT_EQ(run("gen-corpus --n 2 --seed 4 --out " + path("b")).code, 0);
  for (const auto& e : fs::directory_iterator(path("a"))) {
    if (e.path().extension() == ".json") continue;
    EXPECT_EQ(read_file(e.path()), read_file(fs::path(path("b")) / e.path().filename())) << e.path();
  }
  const RunResult tok = run("tokenize --corpus " + path("a"));
  EXPECT_EQ(tok.code, 0);
  EXPECT_EQ(std::count(tok.out.begin(), tok.out.end(), '\n'), 2);
}

}  // namespace
}  // namespace polybuild
