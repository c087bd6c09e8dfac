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

// Subcommands of the ebioc tool. Each returns the process exit code;
// library errors propagate as exceptions and are mapped in main.

#ifndef EBIOC_TOOLS_COMMANDS_H_
#define EBIOC_TOOLS_COMMANDS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ebioc/config.h"
#include "ebioc/cost.h"
#include "ebioc/generator.h"
#include "ebioc/serialization.h"

namespace ebioc::tools {

struct GlobalOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  bool verbose = false;
};

// Config file (or defaults) with the global flags applied.
AppConfig ResolveConfig(const GlobalOptions& global);

// Config echo embedded in artifacts. The worker count is left out so that
// outputs do not depend on it.
Json ConfigEcho(const AppConfig& config);

struct Checkpoint {
  std::unique_ptr<CostModel> cost;
  std::optional<PolicyGenerator> generator;
  Json config;  // echo of the training configuration
};

Json CheckpointToJson(const CostModel& cost, const PolicyGenerator* generator,
                      const AppConfig& config);
Checkpoint ReadCheckpoint(const std::string& path);

struct GenDataOptions {
  std::string spec_path;  // scenario spec; the config's scenario when empty
  std::string theta_star = "lane_keeper";
  std::string out;
};
int GenData(const GlobalOptions& global, const GenDataOptions& opts);

struct SplitOptions {
  std::string data;
  std::optional<double> ratio;
  std::string train_out;
  std::string test_out;
};
int SplitData(const GlobalOptions& global, const SplitOptions& opts);

struct InferOptionsCli {
  std::string tracks;
  std::string out;
  std::string report;  // optional rejection report
};
int InferControls(const GlobalOptions& global, const InferOptionsCli& opts);

struct TrainOptions {
  std::string data;
  std::optional<std::string> cost;
  std::optional<std::string> solver;
  std::string coop = "off";
  std::string multiagent = "off";
  std::string out;
  std::string log;
};
int Train(const GlobalOptions& global, const TrainOptions& opts);

struct SampleOptions {
  std::string ckpt;
  std::string data;
  std::optional<int> samples;
  std::optional<std::string> init;
  std::string out;
};
int Sample(const GlobalOptions& global, const SampleOptions& opts);

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string horizons;  // comma separated seconds; config when empty
  std::string report;
  std::string csv;
};
int Eval(const GlobalOptions& global, const EvalOptions& opts);

struct CornerOptions {
  std::string ckpt;
  std::string report;
  std::string trace;  // optional control-trace CSV
};
int Corner(const GlobalOptions& global, const CornerOptions& opts);

struct AblateOptions {
  std::string sweep;  // steps | stepsize
  std::string values;
  std::string data;
  std::string test;  // split from data when empty
  std::string out;
};
int Ablate(const GlobalOptions& global, const AblateOptions& opts);

std::vector<double> ParseList(const std::string& text);

}  // namespace ebioc::tools

#endif  // EBIOC_TOOLS_COMMANDS_H_
