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

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "ebioc/error.h"
#include "ebioc/logging.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace ebioc::tools;
  CLI::App app{"Energy-based inverse optimal control for trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ebioc 0.1.0");

  GlobalOptions global;
  uint64_t seed = 0;
  int workers = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Global random seed")
                       ->check(CLI::NonNegativeNumber);
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")
                          ->check(CLI::PositiveNumber);
  app.add_option("--config", global.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_flag("-v,--verbose", global.verbose, "Log progress to stderr");
  app.fallthrough();

  int code = 0;

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate expert demonstrations");
  gen_cmd->add_option("--spec", gen.spec_path, "Scenario spec JSON")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--theta-star", gen.theta_star,
                      "Preset name or JSON weight file")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output JSONL dataset")->required();
  gen_cmd->callback([&] { code = GenData(global, gen); });

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Split a dataset into train/test");
  split_cmd->add_option("--data", split.data, "Input JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  split_cmd->add_option("--ratio", split.ratio, "Train fraction");
  split_cmd->add_option("--train-out", split.train_out)->required();
  split_cmd->add_option("--test-out", split.test_out)->required();
  split_cmd->callback([&] { code = SplitData(global, split); });

  InferOptionsCli infer;
  auto* infer_cmd =
      app.add_subcommand("infer-controls", "Recover controls from position tracks");
  infer_cmd->add_option("--tracks", infer.tracks, "Track JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  infer_cmd->add_option("--out", infer.out, "Output JSONL dataset")->required();
  infer_cmd->add_option("--report", infer.report, "Rejection report JSON");
  infer_cmd->callback([&] { code = InferControls(global, infer); });

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Learn a cost function");
  train_cmd->add_option("--data", train.data, "Training JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--cost", train.cost, "linear | mlp | cnn")
      ->check(CLI::IsMember({"linear", "mlp", "cnn"}));
  train_cmd->add_option("--solver", train.solver, "langevin | gd | ilqr")
      ->check(CLI::IsMember({"langevin", "gd", "ilqr"}));
  train_cmd->add_option("--coop", train.coop, "Train a generator initializer")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  train_cmd->add_option("--multiagent", train.multiagent, "Joint scenes")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "Checkpoint JSON")->required();
  train_cmd->add_option("--log", train.log, "Per-epoch JSONL log");
  train_cmd->callback([&] { code = Train(global, train); });

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample trajectories");
  sample_cmd->add_option("--ckpt", sample.ckpt)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--data", sample.data)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--samples", sample.samples, "Samples per scene")
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--init", sample.init, "zeros | generator")
      ->check(CLI::IsMember({"zeros", "generator"}));
  sample_cmd->add_option("--out", sample.out, "Output JSONL")->required();
  sample_cmd->callback([&] { code = Sample(global, sample); });

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score sampled trajectories");
  eval_cmd->add_option("--pred", eval.pred)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval.gt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--horizons", eval.horizons, "Seconds, comma separated");
  eval_cmd->add_option("--report", eval.report, "Report JSON")->required();
  eval_cmd->add_option("--csv", eval.csv, "Report CSV");
  eval_cmd->callback([&] { code = Eval(global, eval); });

  CornerOptions corner;
  auto* corner_cmd = app.add_subcommand("corner", "Run the corner-case suite");
  corner_cmd->add_option("--ckpt", corner.ckpt)->required()->check(CLI::ExistingFile);
  corner_cmd->add_option("--report", corner.report, "Report JSON")->required();
  corner_cmd->add_option("--trace", corner.trace, "Control trace CSV");
  corner_cmd->callback([&] { code = Corner(global, corner); });

  AblateOptions ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep sampler settings");
  ablate_cmd->add_option("--sweep", ablate.sweep, "steps | stepsize")
      ->required()
      ->check(CLI::IsMember({"steps", "stepsize"}));
  ablate_cmd->add_option("--values", ablate.values, "Comma separated")->required();
  ablate_cmd->add_option("--data", ablate.data)->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--test", ablate.test)->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out", ablate.out, "CSV grid")->required();
  ablate_cmd->callback([&] { code = Ablate(global, ablate); });

  app.parse_complete_callback([&] {
    if (seed_opt->count() > 0) global.seed = seed;
    if (workers_opt->count() > 0) global.workers = workers;
    if (global.verbose) ebioc::SetLogLevel(ebioc::LogLevel::kInfo);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ebioc::ConfigError& e) {
    std::fprintf(stderr, "ebioc: configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const ebioc::UnsupportedError& e) {
    std::fprintf(stderr, "ebioc: unsupported: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ebioc: error: %s\n", e.what());
    return kExitFailure;
  }
  return code;
}
