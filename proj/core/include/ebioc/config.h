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

// Experiment configuration as one JSON document. Every section is optional
// and falls back to the library defaults; unknown keys anywhere are an
// error listing all of them.
//
// {
//   "seed": 0, "workers": 1,
//   "scenario": {...}, "expert": {...}, "dynamics": {...},
//   "features": {...}, "limits": {...}, "cost": {...}, "sampler": {...},
//   "train": {...}, "generator": {...}, "eval": {...}, "corner": {...},
//   "ingest": {...}
// }

#ifndef EBIOC_CONFIG_H_
#define EBIOC_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ebioc/cost.h"
#include "ebioc/data.h"
#include "ebioc/eval.h"
#include "ebioc/generator.h"
#include "ebioc/learning.h"
#include "ebioc/sampler.h"
#include "ebioc/serialization.h"

namespace ebioc {

enum class InitMode { kZeros, kGenerator };
std::string ToString(InitMode mode);
InitMode InitModeFromString(const std::string& name);

struct TrainSection {
  int batch_size = 1024;
  int epochs = 40;
  int samples_per_demo = 1;
  // unset: the model kind's default
  std::optional<double> learning_rate;
  std::optional<double> lr_decay;
  double beta1 = 0.5;
  double beta2 = 0.5;
  double epsilon = 1e-8;
  LrSchedule schedule = LrSchedule::kExponential;
  double split_ratio = 0.8;  // used when a command splits its input
};

struct EvalSection {
  std::vector<double> horizons = {1.0, 2.0, 3.0, 4.0};
  int samples = 10;  // M
  double radius = 1.0;
  InitMode init = InitMode::kZeros;
};

struct AppConfig {
  uint64_t seed = 0;
  int workers = 1;
  ScenarioSpec scenario;
  ExpertConfig expert;
  DynamicsVariant dynamics;
  FeatureConfig features;
  ControlLimits limits;
  CostConfig cost;
  SamplerConfig sampler;
  TrainSection train;
  GeneratorConfig generator;
  EvalSection eval;
  CornerThresholds corner;
  IngestOptions ingest;

  // Training configuration with the shared sections, seed and workers
  // filled in.
  TrainConfig MakeTrainConfig() const;
  ExpertConfig MakeExpertConfig() const;
};

// Throws ConfigError on unknown keys, wrong types or invalid values.
AppConfig ConfigFromJson(const Json& j);
AppConfig LoadConfig(const std::string& path);
// Fully resolved configuration, accepted back by ConfigFromJson.
Json ToJson(const AppConfig& config);

// Section-level conversions, usable on their own.
ScenarioSpec ScenarioSpecFromJson(const Json& j);
Json ToJson(const ScenarioSpec& spec);
SamplerConfig SamplerConfigFromJson(const Json& j);
Json ToJson(const SamplerConfig& config);

}  // namespace ebioc

#endif  // EBIOC_CONFIG_H_
