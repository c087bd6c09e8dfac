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

// Noise-driven policy generator used to initialize the synthesis chains,
// and cooperative training of cost model and generator.
//
//   u_t = lim * tanh(F(x_{t-1}, u_{t-1}, e, xi_t)),  x_t = f(x_{t-1}, u_t)
//
// F sees the ego state relative to x_0 plus the previous control (6 inputs),
// the environment encoding (29) and the noise xi_t (4).

#ifndef EBIOC_GENERATOR_H_
#define EBIOC_GENERATOR_H_

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "ebioc/adam.h"
#include "ebioc/cost.h"
#include "ebioc/dynamics.h"
#include "ebioc/eval.h"
#include "ebioc/features.h"
#include "ebioc/learning.h"
#include "ebioc/nn.h"
#include "ebioc/serialization.h"
#include "ebioc/types.h"

namespace ebioc {

inline constexpr int kGeneratorStateDim = 6;
inline constexpr int kNoiseDim = 4;
inline constexpr int kGeneratorInputDim =
    kGeneratorStateDim + kEnvEncodingDim + kNoiseDim;

struct GeneratorConfig {
  std::vector<int> hidden = {64, 16, 8};
  double learning_rate = 2e-3;
  double lr_decay = 0.998;  // per batch
  int updates_per_batch = 5;
  bool use_adam = false;
  AdamConfig adam;  // used when use_adam; learning_rate above applies
  bool update = true;  // false freezes the generator
};

void Validate(const GeneratorConfig& config);

// xi_1..xi_T, each standard normal.
struct NoiseSequence {
  std::vector<Eigen::Vector4d> xi;

  int size() const { return static_cast<int>(xi.size()); }
  bool operator==(const NoiseSequence&) const = default;
};

NoiseSequence SampleNoise(NormalSource& source, int horizon);
// Noise of agent `key`, copy `copy` in `epoch`.
NoiseSequence NoiseFor(uint64_t seed, int epoch, int key, int copy,
                       int horizon);
// 64-bit hash of the exact noise values.
uint64_t Fingerprint(const NoiseSequence& noise);

struct GeneratedSample {
  ControlSequence controls;  // absolute
  Trajectory trajectory;
  uint64_t noise_fingerprint = 0;
};

class PolicyGenerator {
 public:
  explicit PolicyGenerator(const GeneratorConfig& config = {},
                           const ControlLimits& limits = {},
                           const DynamicsVariant& dynamics = {});

  const Mlp& network() const { return net_; }
  const ControlLimits& limits() const { return limits_; }
  const DynamicsVariant& dynamics() const { return dynamics_; }
  const Eigen::VectorXd& params() const { return params_; }
  void set_params(const Eigen::VectorXd& params);
  int num_params() const { return net_.num_params(); }

  // Kaiming-normal hidden layers, zero output layer.
  void Initialize(uint64_t seed);

  GeneratedSample Generate(const State& x0, const Environment& env,
                           const History& history,
                           const NoiseSequence& noise) const;

  // Network input at one step, after the fixed input scaling.
  Eigen::VectorXd Input(const State& state, const State& x0,
                        const Control& prev, const EnvEncoding& env,
                        const Eigen::Vector4d& xi) const;

 private:
  Mlp net_;
  Eigen::VectorXd params_;
  ControlLimits limits_;
  DynamicsVariant dynamics_;
  std::vector<int> hidden_;
};

// One regression target: the refined controls for a start and the noise that
// produced the chain initialization.
struct GeneratorExample {
  const Demonstration* agent = nullptr;  // x_0, environment and history
  NoiseSequence noise;
  ControlSequence refined;  // absolute
  uint64_t init_fingerprint = 0;  // fingerprint returned at initialization
};

// Loss (1/n) sum_i (1/T) sum_t |(u~_it - G(xi_i)_t) / control_std|^2 and its
// gradient over the generator parameters, back-propagated through the
// policy-dynamics unroll. Throws ContractError when an example's noise does
// not match the fingerprint recorded at initialization.
double GeneratorLossGrad(const PolicyGenerator& gen,
                         const std::vector<GeneratorExample>& examples,
                         const Eigen::Vector2d& control_std,
                         Eigen::VectorXd* grad);

Json ToJson(const PolicyGenerator& gen);
PolicyGenerator GeneratorFromJson(const Json& j);

// Chain initializations drawn from the generator; records what the
// generator analysis step needs.
class GeneratorInit {
 public:
  GeneratorInit(const PolicyGenerator& gen,
                const std::vector<JointScene>& scenes, uint64_t seed,
                int copies);

  // TrainHooks::init signature.
  Eigen::VectorXd operator()(const SceneEnergy& energy, int epoch, int scene,
                             int copy);

  const NoiseSequence& noise(int scene, int copy, int agent) const;
  uint64_t fingerprint(int scene, int copy, int agent) const;
  const ControlSequence& generated(int scene, int copy, int agent) const;

 private:
  const PolicyGenerator* gen_;
  const std::vector<JointScene>* scenes_;
  uint64_t seed_;
  int copies_;
  std::vector<int> offsets_;
  // [scene][copy][agent]
  std::vector<std::vector<std::vector<NoiseSequence>>> noise_;
  std::vector<std::vector<std::vector<uint64_t>>> fingerprints_;
  std::vector<std::vector<std::vector<ControlSequence>>> generated_;
};

struct CoopConfig {
  TrainConfig train;
  GeneratorConfig generator;
};

struct CoopTrace {
  TrainTrace train;
  // per epoch: mean normalized |u~ - u^| and mean generator loss
  std::vector<double> refinement_gap;
  std::vector<double> generator_loss;
};

struct CoopResult {
  std::unique_ptr<CostModel> model;
  PolicyGenerator generator;
  CoopTrace trace;
};

// Trains `model` and `gen` in place.
CoopTrace TrainCooperative(const std::vector<JointScene>& scenes,
                           CostModel& model, PolicyGenerator& gen,
                           const CoopConfig& config);
// Fits the normalizer, builds both models from the "init" and "generator"
// substreams and trains them.
CoopResult TrainCooperative(const std::vector<Demonstration>& dataset,
                            const CostConfig& cost, const CoopConfig& config);

// Test-time sampling: `samples` chains per demonstration, started from zeros
// or from the generator when one is given.
struct PredictOptions {
  SamplerConfig solver;
  int samples = 10;
  const PolicyGenerator* generator = nullptr;
  DynamicsVariant dynamics;
  FeatureConfig features;
  ControlLimits limits;
  int workers = 1;
};

// Returns trajectories indexed [demo][sample]. Chain (i, m) uses the seed
// DeriveSeed(solver.seed, "predict", {i, m}).
SampleSets Predict(const CostModel& model,
                   const std::vector<Demonstration>& demos,
                   const PredictOptions& options);

}  // namespace ebioc

#endif  // EBIOC_GENERATOR_H_
