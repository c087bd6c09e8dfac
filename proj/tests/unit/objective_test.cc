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

#include "ebioc/objective.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ebioc/error.h"
#include "testing/finite_diff.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

FeatureNormalizer TestNormalizer() {
  FeatureNormalizer n;
  n.divisor << 10, 5, 10, 5, 2, 10, 0.05, 1, 0.01, 500;
  n.reference_horizon = 10;
  n.control_std = {1.0, 0.05};
  return n;
}

std::vector<std::unique_ptr<CostModel>> AllKinds(int horizon, uint64_t seed) {
  std::vector<std::unique_ptr<CostModel>> out;
  CostConfig c;
  out.push_back(MakeCost(c, TestNormalizer(), horizon, seed));
  c.kind = CostKind::kMlp;
  c.mlp_hidden = {16, 16};
  out.push_back(MakeCost(c, TestNormalizer(), horizon, seed));
  c.kind = CostKind::kConv;
  c.conv_channels = {8, 16};
  c.conv_strides = {2, 1};
  out.push_back(MakeCost(c, TestNormalizer(), horizon, seed));
  return out;
}

Eigen::VectorXd Flat(const ControlSequence& seq) {
  Eigen::VectorXd x(2 * seq.size());
  for (int t = 0; t < seq.size(); ++t) {
    x[2 * t] = seq.controls[t].accel;
    x[2 * t + 1] = seq.controls[t].steer;
  }
  return x;
}

ControlSequence Unflat(const Eigen::VectorXd& x, ControlMode mode) {
  ControlSequence seq;
  seq.mode = mode;
  for (int t = 0; t < x.size() / 2; ++t) {
    seq.controls.push_back({x[2 * t], x[2 * t + 1]});
  }
  return seq;
}

TEST(GradWrtControlsTest, MatchesFiniteDifferencesAllKinds) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Demonstration d = testing::RandomScene(seed, 10);
    for (const auto& model : AllKinds(10, seed)) {
      for (ControlMode mode : {ControlMode::kAbsolute, ControlMode::kDelta}) {
        const ControlSequence seq =
            mode == ControlMode::kAbsolute
                ? d.expert.controls
                : ToDelta(d.expert.controls, d.history.last_control());
        const GradReport r = GradWrtControls(
            *model, seq, d.history.initial_state(), d.env, d.history);
        const Eigen::VectorXd fd = testing::CentralDifference(
            [&](const Eigen::VectorXd& x) {
              return GradWrtControls(*model, Unflat(x, mode),
                                     d.history.initial_state(), d.env,
                                     d.history)
                  .value;
            },
            Flat(seq), 1e-6);
        Eigen::VectorXd g(fd.size());
        for (int t = 0; t < seq.size(); ++t) {
          g.segment<2>(2 * t) = r.d_controls.row(t).transpose();
        }
        EXPECT_LT(testing::RelativeError(g, fd), 1e-5)
            << ToString(model->kind()) << " seed " << seed;
      }
    }
  }
}

TEST(GradWrtControlsTest, ControlOnlyCostClosedForm) {
  const Demonstration d = testing::RandomScene(3, 8);
  FeatureNormalizer n;
  const LinearCost model(n, FeatureVector::Unit(kAccelL2));
  const GradReport r = GradWrtControls(model, d.expert.controls,
                                       d.history.initial_state(), d.env,
                                       d.history);
  for (int t = 0; t < 8; ++t) {
    EXPECT_DOUBLE_EQ(r.d_controls(t, 0), 2.0 * d.expert.controls.controls[t].accel);
    EXPECT_EQ(r.d_controls(t, 1), 0.0);
  }
}

TEST(GradWrtControlsTest, GoalCostCreditsEveryStep) {
  const Demonstration d = testing::RandomScene(4, 10, 0);
  FeatureNormalizer n;
  const LinearCost model(n, FeatureVector::Unit(kDistGoalLat));
  const GradReport r = GradWrtControls(model, d.expert.controls,
                                       d.history.initial_state(), d.env,
                                       d.history);
  // lateral goal error depends on every steering input except the last
  for (int t = 0; t < 9; ++t) EXPECT_NE(r.d_controls(t, 1), 0.0) << t;
}

TEST(SceneEnergyTest, ZGradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<Demonstration> agents = {testing::RandomScene(seed, 10)};
    for (const auto& model : AllKinds(10, seed)) {
      const SceneEnergy energy(*model, agents, 10);
      const Eigen::VectorXd z = energy.ToZ({agents[0].expert.controls});
      Eigen::VectorXd g;
      energy.Evaluate(z, &g);
      const Eigen::VectorXd fd = testing::CentralDifference(
          [&](const Eigen::VectorXd& x) { return energy.Evaluate(x, nullptr); },
          z, 1e-6);
      EXPECT_LT(testing::RelativeError(g, fd), 1e-5) << ToString(model->kind());
    }
  }
}

TEST(SceneEnergyTest, ToZRoundTrip) {
  const std::vector<Demonstration> agents = {testing::RandomScene(1, 10)};
  const LinearCost model(TestNormalizer(), FeatureVector::Ones());
  const SceneEnergy energy(model, agents, 10);
  const Eigen::VectorXd z = energy.ToZ({agents[0].expert.controls});
  const SceneRollout r = energy.Rollout(z);
  for (int t = 0; t < 10; ++t) {
    EXPECT_NEAR(r.controls[0].controls[t].accel,
                agents[0].expert.controls.controls[t].accel, 1e-12);
    EXPECT_NEAR(r.trajectories[0].states[t].x, agents[0].expert.states[t].x,
                1e-9);
  }
  EXPECT_NEAR(energy.Evaluate(z, nullptr), energy.Cost({agents[0].expert}),
              1e-9);
}

TEST(SceneEnergyTest, SaturationZeroesGradient) {
  const std::vector<Demonstration> agents = {testing::RandomScene(2, 5)};
  const LinearCost model(TestNormalizer(), FeatureVector::Ones());
  const SceneEnergy energy(model, agents, 5);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(10);
  z[0] = 100.0;  // accel accumulator far beyond the limit from step 1 on
  Eigen::VectorXd g;
  energy.Evaluate(z, &g);
  const SceneRollout r = energy.Rollout(z);
  for (const Control& c : r.controls[0].controls) EXPECT_EQ(c.accel, 5.0);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(g[2 * t], 0.0);
}

std::vector<Demonstration> TwoAgentScene(double lateral_gap) {
  Demonstration a = testing::RandomScene(10, 10, 0);
  Demonstration b = testing::RandomScene(11, 10, 0);
  for (HistoryFrame& f : b.history.frames) f.state.y += lateral_gap;
  b.expert = Unroll(b.history.initial_state(), b.expert.controls, {});
  b.env.goal.y += lateral_gap;
  return {a, b};
}

TEST(MultiAgentEnergyTest, CoupledGradientMatchesFiniteDifferences) {
  const std::vector<Demonstration> agents = TwoAgentScene(2.0);
  for (const auto& model : AllKinds(10, 3)) {
    const SceneEnergy energy(*model, agents, 10);
    const Eigen::VectorXd z =
        energy.ToZ({agents[0].expert.controls, agents[1].expert.controls});
    Eigen::VectorXd g;
    energy.Evaluate(z, &g);
    const Eigen::VectorXd fd = testing::CentralDifference(
        [&](const Eigen::VectorXd& x) { return energy.Evaluate(x, nullptr); },
        z, 1e-6);
    EXPECT_LT(testing::RelativeError(g, fd), 1e-5) << ToString(model->kind());
  }
}

TEST(MultiAgentEnergyTest, SingleAgentAndFarApartDecouple) {
  const std::vector<Demonstration> agents = TwoAgentScene(1000.0);
  const LinearCost model(TestNormalizer(), FeatureVector::Ones());
  const SceneEnergy joint(model, agents, 10);
  const std::vector<Demonstration> a = {agents[0]};
  const std::vector<Demonstration> b = {agents[1]};
  const SceneEnergy ea(model, a, 10), eb(model, b, 10);
  const Eigen::VectorXd za = ea.ToZ({agents[0].expert.controls});
  const Eigen::VectorXd zb = eb.ToZ({agents[1].expert.controls});
  Eigen::VectorXd z(40);
  z << za, zb;
  Eigen::VectorXd g, ga, gb;
  const double e = joint.Evaluate(z, &g);
  EXPECT_EQ(e, ea.Evaluate(za, &ga) + eb.Evaluate(zb, &gb));
  EXPECT_EQ(g.head(20), ga);
  EXPECT_EQ(g.tail(20), gb);
}

TEST(MultiAgentEnergyTest, PermutationInvariant) {
  const std::vector<Demonstration> agents = TwoAgentScene(2.0);
  const std::vector<Demonstration> swapped = {agents[1], agents[0]};
  const LinearCost model(TestNormalizer(), FeatureVector::Ones());
  const SceneEnergy e1(model, agents, 10), e2(model, swapped, 10);
  const double c1 = e1.Cost({agents[0].expert, agents[1].expert});
  const double c2 = e2.Cost({agents[1].expert, agents[0].expert});
  EXPECT_NEAR(c1, c2, 1e-12 * std::abs(c1));
}

TEST(SceneEnergyTest, RejectsEmptyScene) {
  const LinearCost model;
  EXPECT_THROW(SceneEnergy(model, std::span<const Demonstration>(), 10),
               StructuralError);
}

}  // namespace
}  // namespace ebioc
