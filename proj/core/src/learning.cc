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

#include "ebioc/learning.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ebioc/error.h"
#include "ebioc/eval.h"
#include "ebioc/logging.h"
#include "ebioc/parallel.h"
#include "ebioc/random.h"

namespace ebioc {

std::string ToString(LrSchedule schedule) {
  return schedule == LrSchedule::kRobbinsMonro ? "robbins_monro"
                                               : "exponential";
}

LrSchedule LrScheduleFromString(const std::string& name) {
  if (name == "exponential") return LrSchedule::kExponential;
  if (name == "robbins_monro") return LrSchedule::kRobbinsMonro;
  throw ConfigError("unknown learning-rate schedule '" + name + "'");
}

TrainConfig DefaultTrainConfig(CostKind kind) {
  TrainConfig c;
  switch (kind) {
    case CostKind::kLinear:
      c.adam.learning_rate = 0.1;
      c.lr_decay = 0.999;
      break;
    case CostKind::kMlp:
      c.adam.learning_rate = 5e-3;
      c.lr_decay = 1.0;
      break;
    case CostKind::kConv:
      c.adam.learning_rate = 5e-3;
      c.lr_decay = 0.999;
      break;
  }
  return c;
}

void Validate(const TrainConfig& c) {
  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (c.samples_per_demo < 1) throw ConfigError("samples_per_demo must be >= 1");
  if (!(c.adam.learning_rate > 0.0)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(c.lr_decay > 0.0 && c.lr_decay <= 1.0)) {
    throw ConfigError("lr_decay must lie in (0, 1]");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  Validate(c.sampler);
}

double LearningRateAt(const TrainConfig& c, int64_t step) {
  if (c.schedule == LrSchedule::kRobbinsMonro) {
    return c.adam.learning_rate / (1.0 + static_cast<double>(step));
  }
  return c.adam.learning_rate * std::pow(c.lr_decay, static_cast<double>(step));
}

Json ToJson(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"moment_gap", std::vector<double>(r.moment_gap.data(),
                                             r.moment_gap.data() + kNumFeatures)},
          {"energy_gap", r.energy_gap},
          {"rmse_avg", r.rmse_avg},
          {"rmse_min", r.rmse_min},
          {"missing_rate", r.missing_rate},
          {"wall_time", r.wall_time}};
}

void WriteTrainLog(const std::string& path, const TrainTrace& trace) {
  std::vector<Json> lines;
  for (const EpochRecord& r : trace.epochs) lines.push_back(ToJson(r));
  WriteJsonLines(path, lines);
}

bool SameTrace(const TrainTrace& a, const TrainTrace& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (size_t i = 0; i < a.epochs.size(); ++i) {
    const EpochRecord& x = a.epochs[i];
    const EpochRecord& y = b.epochs[i];
    if (x.epoch != y.epoch || x.analysis_steps != y.analysis_steps ||
        x.learning_rate != y.learning_rate || x.energy_gap != y.energy_gap ||
        x.moment_gap != y.moment_gap || x.rmse_avg != y.rmse_avg ||
        x.rmse_min != y.rmse_min || x.missing_rate != y.missing_rate ||
        x.params.size() != y.params.size() || x.params != y.params) {
      return false;
    }
  }
  return true;
}

uint64_t ChainSeed(uint64_t seed, int epoch, int key, int copy) {
  const uint64_t chain =
      DeriveSeed(seed, "synthesis",
                 {static_cast<uint64_t>(epoch), static_cast<uint64_t>(key),
                  static_cast<uint64_t>(copy)});
  return DeriveSeed(chain, "agent", {0});
}

namespace {

int SceneHorizon(const JointScene& scene) {
  if (scene.agents.empty()) throw StructuralError("scene has no agents");
  const int h = scene.agents.front().horizon();
  for (const Demonstration& a : scene.agents) {
    if (a.horizon() != h) {
      throw StructuralError("agents of a scene have different horizons");
    }
  }
  return h;
}

// Statistics of one scene given its synthesized copies.
struct SlotStats {
  Eigen::VectorXd grad;  // sum over agents of mean_m g(synth) - g(obs)
  double energy_gap = 0.0;                        // summed over agents
  FeatureVector moment_gap = FeatureVector::Zero();  // summed over agents
};

SlotStats SceneStats(const CostModel& model, const JointScene& scene,
                     const std::vector<std::vector<Trajectory>>& copies,
                     const FeatureConfig& features) {
  if (copies.empty()) throw StructuralError("scene has no synthesized copies");
  const int horizon = SceneHorizon(scene);
  const SceneEnergy energy(model, scene.agents, horizon, {}, features);
  const FeatureNormalizer& norm = model.normalizer();
  const double m = static_cast<double>(copies.size());

  SlotStats out;
  Eigen::VectorXd g_obs;
  const std::vector<Trajectory> observed = energy.ExpertTrajectories();
  const double c_obs = energy.Cost(observed, &g_obs);
  for (const FrameFeatureMatrix& f : energy.Frames(observed)) {
    out.moment_gap -= norm.Apply(f.colwise().sum().transpose());
  }

  Eigen::VectorXd g_syn = Eigen::VectorXd::Zero(model.num_params());
  FeatureVector phi_syn = FeatureVector::Zero();
  double c_syn = 0.0;
  Eigen::VectorXd g;
  for (const std::vector<Trajectory>& copy : copies) {
    if (copy.size() != scene.agents.size()) {
      throw StructuralError("synthesized copy has " +
                            std::to_string(copy.size()) + " agents, scene has " +
                            std::to_string(scene.agents.size()));
    }
    c_syn += energy.Cost(copy, &g);
    g_syn += g;
    for (const FrameFeatureMatrix& f : energy.Frames(copy)) {
      phi_syn += norm.Apply(f.colwise().sum().transpose());
    }
  }
  out.grad = g_syn / m - g_obs;
  out.energy_gap = c_syn / m - c_obs;
  out.moment_gap += phi_syn / m;
  return out;
}

std::vector<std::vector<Trajectory>> CopiesOf(
    const std::vector<std::vector<SolverResult>>& results) {
  std::vector<std::vector<Trajectory>> out;
  for (const auto& copy : results) {
    std::vector<Trajectory> agents;
    for (const SolverResult& r : copy) agents.push_back(r.trajectory);
    out.push_back(std::move(agents));
  }
  return out;
}

struct SlotWork {
  std::vector<Eigen::VectorXd> z_init;
  std::vector<std::vector<SolverResult>> results;
};

SlotWork Synthesize(const CostModel& model, const JointScene& scene,
                    int scene_index, int key_offset, int epoch,
                    uint64_t seed, const TrainConfig& config,
                    const TrainHooks& hooks) {
  const int horizon = SceneHorizon(scene);
  const SceneEnergy energy(
      model, scene.agents, horizon,
      config.dynamics.WithDt(scene.agents.front().env.dt), config.features,
      config.limits);
  SlotWork work;
  for (int c = 0; c < config.samples_per_demo; ++c) {
    Eigen::VectorXd z0 = hooks.init ? hooks.init(energy, epoch, scene_index, c)
                                    : Eigen::VectorXd::Zero(energy.dim());
    std::vector<uint64_t> seeds;
    for (int k = 0; k < energy.num_agents(); ++k) {
      seeds.push_back(ChainSeed(seed, epoch, key_offset + k, c));
    }
    SamplerConfig sampler = config.sampler;
    sampler.seed = DeriveSeed(seed, "synthesis",
                              {static_cast<uint64_t>(epoch),
                               static_cast<uint64_t>(key_offset),
                               static_cast<uint64_t>(c)});
    std::vector<SolverResult> r =
        hooks.solve ? hooks.solve(energy, z0, sampler, seeds)
                    : SolveScene(energy, z0, sampler, seeds);
    work.z_init.push_back(std::move(z0));
    work.results.push_back(std::move(r));
  }
  return work;
}

std::vector<int> KeyOffsets(const std::vector<JointScene>& scenes) {
  std::vector<int> offsets;
  int key = 0;
  for (const JointScene& s : scenes) {
    offsets.push_back(key);
    key += s.size();
  }
  return offsets;
}

}  // namespace

Eigen::VectorXd EstimateSceneLikelihoodGrad(
    const CostModel& model, std::span<const JointScene> batch,
    const std::vector<std::vector<std::vector<Trajectory>>>& synthesized,
    const FeatureConfig& features) {
  if (batch.size() != synthesized.size()) {
    throw StructuralError("batch of " + std::to_string(batch.size()) +
                          " scenes has " + std::to_string(synthesized.size()) +
                          " synthesized entries");
  }
  if (batch.empty()) throw StructuralError("empty batch");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(model.num_params());
  int agents = 0;
  for (size_t s = 0; s < batch.size(); ++s) {
    total += SceneStats(model, batch[s], synthesized[s], features).grad;
    agents += batch[s].size();
  }
  return total / static_cast<double>(agents);
}

Eigen::VectorXd EstimateLikelihoodGrad(
    const CostModel& model, std::span<const Demonstration> batch,
    const std::vector<std::vector<Trajectory>>& synthesized,
    const FeatureConfig& features) {
  if (batch.size() != synthesized.size()) {
    throw StructuralError("batch of " + std::to_string(batch.size()) +
                          " demonstrations has " +
                          std::to_string(synthesized.size()) +
                          " synthesized entries");
  }
  std::vector<JointScene> scenes;
  std::vector<std::vector<std::vector<Trajectory>>> nested;
  for (size_t i = 0; i < batch.size(); ++i) {
    scenes.push_back({{batch[i]}});
    std::vector<std::vector<Trajectory>> copies;
    for (const Trajectory& t : synthesized[i]) copies.push_back({t});
    nested.push_back(std::move(copies));
  }
  return EstimateSceneLikelihoodGrad(model, scenes, nested, features);
}

std::vector<JointScene> AsSingleAgentScenes(
    const std::vector<Demonstration>& dataset) {
  std::vector<JointScene> scenes;
  scenes.reserve(dataset.size());
  for (const Demonstration& d : dataset) scenes.push_back({{d}});
  return scenes;
}

TrainTrace TrainScenes(const std::vector<JointScene>& scenes, CostModel& model,
                       const TrainConfig& config, const TrainHooks& hooks) {
  Validate(config);
  if (scenes.empty()) throw StructuralError("cannot train on an empty dataset");
  const std::vector<int> offsets = KeyOffsets(scenes);
  const auto start = std::chrono::steady_clock::now();

  AdamState adam = AdamState::Start(model.params());
  int64_t step = 0;
  TrainTrace trace;
  std::vector<int> order(scenes.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(
        DeriveSeed(config.seed, "shuffle", {static_cast<uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord record;
    record.epoch = epoch;
    int epoch_agents = 0;
    SampleSets samples;
    std::vector<Trajectory> experts;
    const int n = static_cast<int>(order.size());
    for (int begin = 0, batch = 0; begin < n;
         begin += config.batch_size, ++batch) {
      const int end = std::min(n, begin + config.batch_size);
      const int size = end - begin;
      std::vector<SlotWork> work(size);
      std::vector<SlotStats> stats(size);
      ParallelFor(size, config.workers, [&](int i) {
        const int s = order[begin + i];
        work[i] = Synthesize(model, scenes[s], s, offsets[s], epoch,
                             config.seed, config, hooks);
        stats[i] = SceneStats(model, scenes[s], CopiesOf(work[i].results),
                              config.features);
      });

      Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.num_params());
      int agents = 0;
      for (int i = 0; i < size; ++i) {
        const JointScene& scene = scenes[order[begin + i]];
        grad += stats[i].grad;
        record.energy_gap += stats[i].energy_gap;
        record.moment_gap += stats[i].moment_gap;
        agents += scene.size();
        for (int k = 0; k < scene.size(); ++k) {
          std::vector<Trajectory> set;
          for (const auto& copy : work[i].results) {
            set.push_back(copy[k].trajectory);
          }
          samples.push_back(std::move(set));
          experts.push_back(scene.agents[k].expert);
        }
      }
      grad /= static_cast<double>(agents);
      epoch_agents += agents;

      // ascend L' by descending -L'
      const double lr = LearningRateAt(config, step);
      adam = AdamStep(std::move(adam), -grad, lr, config.adam);
      ++step;
      if (!adam.params.allFinite() || !grad.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite parameter update at epoch " << epoch << ", batch "
            << batch << " (gradient norm " << grad.norm()
            << ", last finite parameters [" << model.params().transpose()
            << "])";
        throw DivergenceError(msg.str());
      }
      model.set_params(adam.params);
      record.learning_rate = lr;

      if (hooks.after_batch) {
        BatchOutcome outcome;
        outcome.epoch = epoch;
        outcome.batch = batch;
        for (int i = 0; i < size; ++i) {
          outcome.scenes.push_back(order[begin + i]);
          outcome.z_init.push_back(std::move(work[i].z_init));
          outcome.results.push_back(std::move(work[i].results));
        }
        hooks.after_batch(outcome);
      }
    }
    const double count = static_cast<double>(epoch_agents);
    record.energy_gap /= count;
    record.moment_gap /= count;
    const OverallRmsePair rmse = OverallAvgMin(samples, experts);
    record.rmse_avg = rmse.avg;
    record.rmse_min = rmse.min;
    record.missing_rate = MissingRate(samples, experts);
    record.analysis_steps = static_cast<int>(step);
    record.params = model.params();
    record.wall_time = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    std::ostringstream msg;
    msg << "epoch " << epoch << " energy_gap " << record.energy_gap
        << " max|moment_gap| " << record.moment_gap.cwiseAbs().maxCoeff()
        << " rmse_avg " << record.rmse_avg;
    LogInfo(msg.str());
    trace.epochs.push_back(std::move(record));
  }
  return trace;
}

TrainTrace TrainEbm(const std::vector<Demonstration>& dataset,
                    CostModel& model, const TrainConfig& config,
                    const TrainHooks& hooks) {
  return TrainScenes(AsSingleAgentScenes(dataset), model, config, hooks);
}

TrainResult TrainEbm(const std::vector<Demonstration>& dataset,
                     const CostConfig& cost, const TrainConfig& config) {
  if (dataset.empty()) throw StructuralError("cannot train on an empty dataset");
  const FeatureNormalizer norm = FitNormalizer(dataset, config.features);
  TrainResult out;
  out.model = MakeCost(cost, norm, norm.reference_horizon,
                       DeriveSeed(config.seed, "init"));
  out.trace = TrainEbm(dataset, *out.model, config);
  return out;
}

FeatureVector MomentGap(const CostModel& model,
                        const std::vector<JointScene>& scenes,
                        const TrainConfig& config, uint64_t seed) {
  if (scenes.empty()) throw StructuralError("no scenes");
  const std::vector<int> offsets = KeyOffsets(scenes);
  const uint64_t stream = DeriveSeed(seed, "moment");
  std::vector<SlotStats> stats(scenes.size());
  ParallelFor(static_cast<int>(scenes.size()), config.workers, [&](int s) {
    const SlotWork work = Synthesize(model, scenes[s], s, offsets[s], 0,
                                     stream, config, {});
    stats[s] = SceneStats(model, scenes[s], CopiesOf(work.results),
                          config.features);
  });
  FeatureVector gap = FeatureVector::Zero();
  int agents = 0;
  for (size_t s = 0; s < scenes.size(); ++s) {
    gap += stats[s].moment_gap;
    agents += scenes[s].size();
  }
  return gap / static_cast<double>(agents);
}

}  // namespace ebioc
