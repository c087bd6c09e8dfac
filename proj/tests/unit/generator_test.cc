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

#include "ebioc/generator.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ebioc/data.h"
#include "ebioc/error.h"
#include "ebioc/random.h"
#include "testing/finite_diff.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

GeneratorConfig SmallGenerator() {
  GeneratorConfig c;
  c.hidden = {12, 6};
  return c;
}

Eigen::VectorXd RandomParams(int n, uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = g(rng);
  return p;
}

TEST(GeneratorTest, InputLayout) {
  EXPECT_EQ(kGeneratorInputDim, kGeneratorStateDim + kEnvEncodingDim + kNoiseDim);
  PolicyGenerator gen(SmallGenerator());
  EXPECT_EQ(gen.network().num_params(), gen.num_params());
}

TEST(GeneratorTest, ZeroLastLayerGivesZeroControls) {
  PolicyGenerator gen(SmallGenerator());
  gen.Initialize(3);
  const Demonstration d = testing::RandomScene(1, 10);
  const NoiseSequence xi = NoiseFor(5, 0, 0, 0, 10);
  const GeneratedSample s =
      gen.Generate(d.history.initial_state(), d.env, d.history, xi);
  ASSERT_EQ(s.controls.size(), 10);
  for (const Control& u : s.controls.controls) EXPECT_EQ(u, (Control{0.0, 0.0}));
  EXPECT_EQ(s.trajectory,
            Unroll(d.history.initial_state(), s.controls, gen.dynamics()));
  EXPECT_EQ(s.noise_fingerprint, Fingerprint(xi));
}

TEST(GeneratorTest, OutputsRespectControlLimits) {
  const ControlLimits limits{2.0, 0.2};
  PolicyGenerator gen(SmallGenerator(), limits);
  gen.set_params(RandomParams(gen.num_params(), 4, 5.0));
  for (uint64_t s = 0; s < 5; ++s) {
    const Demonstration d = testing::RandomScene(s, 20);
    const GeneratedSample g = gen.Generate(d.history.initial_state(), d.env,
                                           d.history, NoiseFor(1, 0, s, 0, 20));
    for (const Control& u : g.controls.controls) {
      EXPECT_LE(std::abs(u.accel), 2.0);
      EXPECT_LE(std::abs(u.steer), 0.2);
    }
  }
}

TEST(GeneratorTest, NoiseStreamsAreDistinctAndReproducible) {
  EXPECT_EQ(NoiseFor(1, 2, 3, 4, 8), NoiseFor(1, 2, 3, 4, 8));
  EXPECT_NE(Fingerprint(NoiseFor(1, 2, 3, 4, 8)),
            Fingerprint(NoiseFor(1, 2, 3, 5, 8)));
  EXPECT_NE(Fingerprint(NoiseFor(1, 2, 3, 4, 8)),
            Fingerprint(NoiseFor(1, 3, 3, 4, 8)));
}

TEST(GeneratorTest, LossGradientMatchesFiniteDifferences) {
  PolicyGenerator gen(SmallGenerator());
  gen.set_params(RandomParams(gen.num_params(), 8, 0.3));
  std::vector<Demonstration> demos;
  std::vector<GeneratorExample> examples;
  for (uint64_t s = 0; s < 3; ++s) demos.push_back(testing::RandomScene(s, 8));
  std::mt19937_64 rng(2);
  for (uint64_t s = 0; s < 3; ++s) {
    GeneratorExample ex;
    ex.agent = &demos[s];
    ex.noise = NoiseFor(6, 0, s, 0, 8);
    ex.init_fingerprint = Fingerprint(ex.noise);
    ex.refined = testing::RandomControls(rng, 8, 1.0, 0.05);
    examples.push_back(ex);
  }
  const Eigen::Vector2d std(1.0, 0.05);
  Eigen::VectorXd grad;
  GeneratorLossGrad(gen, examples, std, &grad);
  const Eigen::VectorXd fd = testing::CentralDifference(
      [&](const Eigen::VectorXd& p) {
        PolicyGenerator g = gen;
        g.set_params(p);
        return GeneratorLossGrad(g, examples, std, nullptr);
      },
      gen.params(), 1e-6);
  EXPECT_LT(testing::RelativeError(grad, fd), 1e-5);
}

TEST(GeneratorTest, LossIsZeroAtItsOwnOutput) {
  PolicyGenerator gen(SmallGenerator());
  gen.set_params(RandomParams(gen.num_params(), 9, 0.3));
  const Demonstration d = testing::RandomScene(2, 8);
  GeneratorExample ex;
  ex.agent = &d;
  ex.noise = NoiseFor(1, 0, 0, 0, 8);
  ex.init_fingerprint = Fingerprint(ex.noise);
  ex.refined =
      gen.Generate(d.history.initial_state(), d.env, d.history, ex.noise).controls;
  Eigen::VectorXd grad;
  EXPECT_NEAR(GeneratorLossGrad(gen, {ex}, {1.0, 0.05}, &grad), 0.0, 1e-20);
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GeneratorTest, NoiseMismatchIsAContractViolation) {
  PolicyGenerator gen(SmallGenerator());
  gen.Initialize(1);
  const Demonstration d = testing::RandomScene(2, 8);
  GeneratorExample ex;
  ex.agent = &d;
  ex.noise = NoiseFor(1, 0, 0, 0, 8);
  ex.init_fingerprint = Fingerprint(NoiseFor(1, 0, 0, 1, 8));
  ex.refined = HoldControls(d.history, 8);
  EXPECT_THROW(GeneratorLossGrad(gen, {ex}, {1.0, 0.05}, nullptr), ContractError);
}

TEST(GeneratorTest, JsonRoundTrip) {
  PolicyGenerator gen(SmallGenerator(), {3.0, 0.4});
  gen.set_params(RandomParams(gen.num_params(), 3, 0.5));
  const PolicyGenerator back = GeneratorFromJson(Json::parse(ToJson(gen).dump()));
  EXPECT_EQ(back.params(), gen.params());
  EXPECT_EQ(back.limits().accel_max, 3.0);
  const Demonstration d = testing::RandomScene(4, 6);
  const NoiseSequence xi = NoiseFor(2, 0, 0, 0, 6);
  EXPECT_EQ(back.Generate(d.history.initial_state(), d.env, d.history, xi).controls,
            gen.Generate(d.history.initial_state(), d.env, d.history, xi).controls);
}

TrainConfig SmallTrain() {
  TrainConfig c = DefaultTrainConfig(CostKind::kLinear);
  c.batch_size = 3;
  c.epochs = 2;
  c.sampler.steps = 5;
  c.seed = 21;
  return c;
}

TEST(CooperativeTest, FrozenGeneratorEqualsTrainingWithItsInitHook) {
  std::vector<Demonstration> demos;
  for (uint64_t s = 0; s < 6; ++s) demos.push_back(testing::RandomScene(s, 8));
  const std::vector<JointScene> scenes = AsSingleAgentScenes(demos);
  CoopConfig cc{SmallTrain(), SmallGenerator()};
  cc.generator.update = false;
  cc.train.samples_per_demo = 2;

  PolicyGenerator gen(cc.generator);
  gen.set_params(RandomParams(gen.num_params(), 5, 0.2));
  const auto base = MakeCost(CostConfig{}, FitNormalizer(demos), 8, 1);

  auto a = base->Clone();
  PolicyGenerator gen_a = gen;
  const CoopTrace coop = TrainCooperative(scenes, *a, gen_a, cc);
  EXPECT_EQ(gen_a.params(), gen.params());

  auto b = base->Clone();
  GeneratorInit init(gen, scenes, DeriveSeed(cc.train.seed, "xi"), 2);
  TrainHooks hooks;
  hooks.init = std::ref(init);
  const TrainTrace plain = TrainScenes(scenes, *b, cc.train, hooks);
  EXPECT_TRUE(SameTrace(coop.train, plain));
  EXPECT_EQ(a->params(), b->params());
}

TEST(GeneratorTest, GradientStepsFitFixedTargets) {
  PolicyGenerator gen(SmallGenerator());
  gen.Initialize(2);
  std::vector<Demonstration> demos;
  for (uint64_t s = 0; s < 4; ++s) demos.push_back(testing::RandomScene(s, 10));
  std::vector<GeneratorExample> examples;
  for (uint64_t s = 0; s < 4; ++s) {
    GeneratorExample ex;
    ex.agent = &demos[s];
    ex.noise = NoiseFor(3, 0, s, 0, 10);
    ex.init_fingerprint = Fingerprint(ex.noise);
    ex.refined = demos[s].expert.controls;
    examples.push_back(ex);
  }
  const Eigen::Vector2d std(1.0, 0.05);
  Eigen::VectorXd grad;
  const double start = GeneratorLossGrad(gen, examples, std, &grad);
  double loss = start;
  for (int step = 0; step < 100; ++step) {
    gen.set_params(gen.params() - 1e-4 * grad);
    const double next = GeneratorLossGrad(gen, examples, std, &grad);
    EXPECT_LE(next, loss) << "step " << step;
    loss = next;
  }
  EXPECT_LT(loss, 0.95 * start);
}

TEST(CooperativeTest, GeneratorIsUpdatedEveryBatch) {
  std::vector<Demonstration> demos;
  for (uint64_t s = 0; s < 6; ++s) demos.push_back(testing::RandomScene(s, 8));
  const std::vector<JointScene> scenes = AsSingleAgentScenes(demos);
  CoopConfig cc{SmallTrain(), SmallGenerator()};
  cc.train.epochs = 3;
  auto model = GroundTruthCost(ThetaStarPreset("lane_keeper"), 8);
  PolicyGenerator gen(cc.generator);
  gen.Initialize(4);
  const Eigen::VectorXd before = gen.params();
  const CoopTrace r = TrainCooperative(scenes, *model, gen, cc);
  EXPECT_NE(gen.params(), before);
  ASSERT_EQ(r.generator_loss.size(), 3u);
  ASSERT_EQ(r.refinement_gap.size(), 3u);
  for (double l : r.generator_loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_EQ(r.train.epochs.size(), 3u);
}

TEST(CooperativeTest, DeterministicAndWorkerIndependent) {
  std::vector<Demonstration> demos;
  for (uint64_t s = 0; s < 5; ++s) demos.push_back(testing::RandomScene(s, 8));
  CoopConfig cc{SmallTrain(), SmallGenerator()};
  const CoopResult a = TrainCooperative(demos, CostConfig{}, cc);
  cc.train.workers = 3;
  const CoopResult b = TrainCooperative(demos, CostConfig{}, cc);
  EXPECT_TRUE(SameTrace(a.trace.train, b.trace.train));
  EXPECT_EQ(a.generator.params(), b.generator.params());
  EXPECT_EQ(a.trace.generator_loss, b.trace.generator_loss);
}

TEST(PredictTest, DeterministicAcrossWorkers) {
  std::vector<Demonstration> demos;
  for (uint64_t s = 0; s < 4; ++s) demos.push_back(testing::RandomScene(s, 10));
  const auto model = MakeCost(CostConfig{}, FitNormalizer(demos), 10, 4);
  PredictOptions opts;
  opts.solver.steps = 6;
  opts.samples = 3;
  const SampleSets a = Predict(*model, demos, opts);
  opts.workers = 4;
  const SampleSets b = Predict(*model, demos, opts);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(a[0].size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a[0][0], a[0][1]);
}

TEST(PredictTest, GeneratorStartsTheChains) {
  std::vector<Demonstration> demos = {testing::RandomScene(1, 10)};
  const auto model = MakeCost(CostConfig{}, FitNormalizer(demos), 10, 4);
  PolicyGenerator gen(SmallGenerator());
  gen.set_params(RandomParams(gen.num_params(), 7, 0.5));
  PredictOptions opts;
  opts.solver.kind = SolverKind::kGd;
  opts.solver.steps = 1;
  opts.solver.step_size = 1e-300;
  opts.samples = 2;
  opts.generator = &gen;
  const SampleSets s = Predict(*model, demos, opts);
  // a negligible step leaves the generated rollout in place
  const GeneratedSample g =
      gen.Generate(demos[0].history.initial_state(), demos[0].env,
                   demos[0].history,
                   NoiseFor(DeriveSeed(opts.solver.seed, "predict_xi"), 0, 0, 0, 10));
  for (int t = 0; t < 10; ++t) {
    EXPECT_NEAR(s[0][0].states[t].x, g.trajectory.states[t].x, 1e-9);
    EXPECT_NEAR(s[0][0].states[t].y, g.trajectory.states[t].y, 1e-9);
  }
}

}  // namespace
}  // namespace ebioc
