// Copyright 2026 The ebioc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the ebioc executable end to end on a small configuration.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#ifndef EBIOC_CLI_PATH
#error "EBIOC_CLI_PATH must point at the ebioc executable"
#endif

namespace {

namespace fs = std::filesystem;

constexpr const char* kConfig = R"({
  "scenario": {"count": 24, "horizon": 20},
  "train": {"batch_size": 8, "epochs": 2},
  "sampler": {"steps": 8},
  "eval": {"samples": 3, "horizons": [1.0, 2.0]}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("ebioc_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "config.json") << kConfig;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `ebioc <args>`; stderr goes to stderr.txt.
  int Run(const std::string& args) const {
    const std::string cmd = std::string(EBIOC_CLI_PATH) + " " + args + " 2>" +
                            Path("stderr.txt") + " >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Read(const std::string& name) const {
    std::ifstream in(Path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // gen-data, split, train, sample and eval; returns the eval exit code.
  int Pipeline(const std::string& tag, int workers) const {
    const std::string g = "--config " + Path("config.json") + " --seed 5 --workers " +
                          std::to_string(workers) + " ";
    if (Run(g + "gen-data --theta-star lane_keeper --out " + Path(tag + "d.jsonl")))
      return 10;
    if (Run(g + "split --data " + Path(tag + "d.jsonl") + " --train-out " +
            Path(tag + "tr.jsonl") + " --test-out " + Path(tag + "te.jsonl")))
      return 11;
    if (Run(g + "train --data " + Path(tag + "tr.jsonl") + " --out " +
            Path(tag + "ck.json") + " --log " + Path(tag + "log.jsonl")))
      return 12;
    if (Run(g + "sample --ckpt " + Path(tag + "ck.json") + " --data " +
            Path(tag + "te.jsonl") + " --out " + Path(tag + "p.jsonl")))
      return 13;
    return Run(g + "eval --pred " + Path(tag + "p.jsonl") + " --gt " +
               Path(tag + "te.jsonl") + " --horizons 1,2 --report " +
               Path(tag + "r.json") + " --csv " + Path(tag + "r.csv"));
  }

  fs::path dir_;
};

TEST_F(CliTest, LaneKeeperPipelineRunsEndToEnd) {
  ASSERT_EQ(Pipeline("a", 1), 0) << Read("stderr.txt");
  const std::string report = Read("ar.json");
  EXPECT_NE(report.find("\"avg_rmse\""), std::string::npos);
  EXPECT_NE(report.find("\"config_hash\""), std::string::npos);
  EXPECT_EQ(Read("ar.csv").substr(0, 38), "horizon,avg_rmse,min_rmse,missing_rate");
  EXPECT_FALSE(Read("alog.jsonl").empty());
  EXPECT_FALSE(Read("ad.jsonl.meta.json").empty());
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossRunsAndWorkers) {
  ASSERT_EQ(Pipeline("a", 1), 0) << Read("stderr.txt");
  ASSERT_EQ(Pipeline("b", 1), 0) << Read("stderr.txt");
  ASSERT_EQ(Pipeline("c", 3), 0) << Read("stderr.txt");
  EXPECT_EQ(Read("ar.json"), Read("br.json"));
  EXPECT_EQ(Read("ar.json"), Read("cr.json"));
  EXPECT_EQ(Read("ack.json"), Read("cck.json"));
  EXPECT_EQ(Read("ap.jsonl"), Read("cp.jsonl"));
}

TEST_F(CliTest, IlqrWithCnnCostIsRejectedImmediately) {
  std::ofstream(Path("empty.jsonl")) << "";
  const int code = Run("train --data " + Path("empty.jsonl") +
                       " --cost cnn --solver ilqr --out " + Path("x.json"));
  EXPECT_EQ(code, 2);
  EXPECT_NE(Read("stderr.txt").find("unsupported"), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("x.json")));
}

TEST_F(CliTest, UnknownConfigKeysAreListed) {
  std::ofstream(Path("bad.json")) << R"({"sampler": {"stepz": 3}, "trian": {}})";
  std::ofstream(Path("empty.jsonl")) << "";
  const int code = Run("--config " + Path("bad.json") + " gen-data --out " +
                       Path("d.jsonl"));
  EXPECT_EQ(code, 2);
  const std::string err = Read("stderr.txt");
  EXPECT_NE(err.find("sampler.stepz"), std::string::npos) << err;
  EXPECT_NE(err.find("trian"), std::string::npos) << err;
}

TEST_F(CliTest, UsageErrorsFailWithoutOutput) {
  EXPECT_NE(Run("train --cost linear"), 0);
  EXPECT_NE(Run("frobnicate"), 0);
  EXPECT_NE(Run("gen-data --theta-star nobody --out " + Path("d.jsonl")), 0);
}

}  // namespace
