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

// Maximum-likelihood training of a cost model by analysis by synthesis.
//
// Every epoch the scenes are reshuffled and cut into mini-batches. For each
// batch, M chains per scene are started from zeros (or a hook-provided
// initialization) and run with the configured solver; the likelihood
// gradient
//
//   L'(theta) = mean[dC/dtheta(synthesized) - dC/dtheta(observed)]
//
// is then ascended with Adam. Single-agent training treats each
// demonstration as a one-agent scene, so both paths share one engine.

#ifndef EBIOC_LEARNING_H_
#define EBIOC_LEARNING_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ebioc/adam.h"
#include "ebioc/cost.h"
#include "ebioc/dynamics.h"
#include "ebioc/features.h"
#include "ebioc/objective.h"
#include "ebioc/sampler.h"
#include "ebioc/serialization.h"
#include "ebioc/types.h"

namespace ebioc {

enum class LrSchedule { kExponential, kRobbinsMonro };

std::string ToString(LrSchedule schedule);
LrSchedule LrScheduleFromString(const std::string& name);

struct TrainConfig {
  int batch_size = 1024;
  int epochs = 40;
  int samples_per_demo = 1;  // M
  AdamConfig adam;
  double lr_decay = 0.999;  // per analysis step
  // exponential: lr * decay^tau; robbins_monro: lr / (1 + tau)
  LrSchedule schedule = LrSchedule::kExponential;
  SamplerConfig sampler;
  uint64_t seed = 0;
  int workers = 1;
  DynamicsVariant dynamics;
  FeatureConfig features;
  ControlLimits limits;
};

// Learning rate and decay for the model kind: linear 0.1 / 0.999,
// mlp 5e-3 / none, cnn 5e-3 / 0.999.
TrainConfig DefaultTrainConfig(CostKind kind);

// Throws ConfigError unless batch_size, epochs and M are >= 1 and the
// learning rate is positive.
void Validate(const TrainConfig& config);

double LearningRateAt(const TrainConfig& config, int64_t analysis_step);

struct EpochRecord {
  int epoch = 0;
  int analysis_steps = 0;  // cumulative
  double learning_rate = 0.0;  // of the last step of the epoch
  // Means over the epoch's agents of C(synthesized) - C(observed) and of the
  // normalized feature difference.
  double energy_gap = 0.0;
  FeatureVector moment_gap = FeatureVector::Zero();
  double rmse_avg = 0.0;
  double rmse_min = 0.0;
  double missing_rate = 0.0;
  double wall_time = 0.0;
  Eigen::VectorXd params;  // after the epoch
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

// {epoch, moment_gap, energy_gap, rmse_avg, rmse_min, missing_rate,
//  wall_time}
Json ToJson(const EpochRecord& record);
void WriteTrainLog(const std::string& path, const TrainTrace& trace);

// True when the traces agree bit for bit in everything but wall time.
bool SameTrace(const TrainTrace& a, const TrainTrace& b);

// synthesized[i] holds the M trajectories drawn for batch[i].
Eigen::VectorXd EstimateLikelihoodGrad(
    const CostModel& model, std::span<const Demonstration> batch,
    const std::vector<std::vector<Trajectory>>& synthesized,
    const FeatureConfig& features = {});

// Scene form: synthesized[s][m][k] is agent k of copy m of scene s. Per-agent
// differences are summed and divided by the total number of agents.
Eigen::VectorXd EstimateSceneLikelihoodGrad(
    const CostModel& model, std::span<const JointScene> batch,
    const std::vector<std::vector<std::vector<Trajectory>>>& synthesized,
    const FeatureConfig& features = {});

// What a batch produced, for the hooks.
struct BatchOutcome {
  int epoch = 0;
  int batch = 0;
  std::vector<int> scenes;  // dataset indices
  // [slot][copy]: chain start and per-agent solver results
  std::vector<std::vector<Eigen::VectorXd>> z_init;
  std::vector<std::vector<std::vector<SolverResult>>> results;
};

struct TrainHooks {
  // Chain start for copy `copy` of dataset scene `scene`; zeros when unset.
  std::function<Eigen::VectorXd(const SceneEnergy& energy, int epoch,
                                int scene, int copy)>
      init;
  // Replaces the configured solver.
  std::function<std::vector<SolverResult>(
      const SceneEnergy& energy, const Eigen::VectorXd& z0,
      const SamplerConfig& config, const std::vector<uint64_t>& agent_seeds)>
      solve;
  // Runs after the cost update of every batch.
  std::function<void(const BatchOutcome& outcome)> after_batch;
};

// Noise seed of agent `key` (its index in the flattened agent list) for
// copy `copy` in `epoch`. Equal keys give equal chains in single- and
// multi-agent training.
uint64_t ChainSeed(uint64_t seed, int epoch, int key, int copy);

// Trains `model` in place.
TrainTrace TrainScenes(const std::vector<JointScene>& scenes, CostModel& model,
                       const TrainConfig& config, const TrainHooks& hooks = {});

struct TrainResult {
  std::unique_ptr<CostModel> model;
  TrainTrace trace;
};

// Fits the normalizer on `dataset`, builds the model from `cost` (seeded
// from the "init" substream) and trains it.
TrainResult TrainEbm(const std::vector<Demonstration>& dataset,
                     const CostConfig& cost, const TrainConfig& config);
// Trains a caller-built model in place.
TrainTrace TrainEbm(const std::vector<Demonstration>& dataset,
                    CostModel& model, const TrainConfig& config,
                    const TrainHooks& hooks = {});

std::vector<JointScene> AsSingleAgentScenes(
    const std::vector<Demonstration>& dataset);

// Per-feature normalized difference between solver outputs under the current
// model and the observed demonstrations, averaged over agents and M copies.
// Chains use the "moment" substream of `seed`.
FeatureVector MomentGap(const CostModel& model,
                        const std::vector<JointScene>& scenes,
                        const TrainConfig& config, uint64_t seed);

}  // namespace ebioc

#endif  // EBIOC_LEARNING_H_
