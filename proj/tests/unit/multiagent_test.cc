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

#include "ebioc/multiagent.h"

#include <algorithm>

#include <gtest/gtest.h>

#include "ebioc/data.h"
#include "ebioc/error.h"
#include "ebioc/objective.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

// Agents on parallel straight roads `spacing` metres apart laterally, no
// other traffic.
JointScene FarScene(int agents, double spacing, uint64_t seed, int horizon = 8) {
  JointScene scene;
  for (int k = 0; k < agents; ++k) {
    Demonstration d = testing::RandomScene(seed * 100 + k, horizon, 0);
    const double dy = spacing * k;
    for (HistoryFrame& f : d.history.frames) f.state.y += dy;
    for (State& s : d.expert.states) s.y += dy;
    d.env.lane[0] += dy;
    d.env.goal.y += dy;
    scene.agents.push_back(d);
  }
  return scene;
}

std::vector<Trajectory> Experts(const JointScene& scene) {
  std::vector<Trajectory> out;
  for (const Demonstration& d : scene.agents) out.push_back(d.expert);
  return out;
}

TEST(ValidateSceneTest, RejectsMalformedScenes) {
  EXPECT_THROW(ValidateScene(JointScene{}), StructuralError);
  JointScene scene = FarScene(2, 100.0, 1);
  EXPECT_NO_THROW(ValidateScene(scene));
  JointScene bad = scene;
  bad.agents[1].expert.states.pop_back();
  bad.agents[1].expert.controls.controls.pop_back();
  EXPECT_THROW(ValidateScene(bad), StructuralError);
  bad = scene;
  bad.agents[1].env.dt = 0.2;
  EXPECT_THROW(ValidateScene(bad), StructuralError);
  JointScene crowd;
  crowd.agents.assign(kMaxAgents + 1, scene.agents[0]);
  EXPECT_THROW(ValidateScene(crowd), StructuralError);
}

TEST(JointCostTest, FarAgentsDecouple) {
  const auto model = GroundTruthCost(ThetaStarPreset("defensive"), 8);
  const JointScene scene = FarScene(3, 1000.0, 2);
  double separate = 0.0;
  for (const Demonstration& d : scene.agents) {
    separate += CostValue(*model, d.expert, d.env, d.history);
  }
  EXPECT_NEAR(JointCost(*model, Experts(scene), scene), separate,
              1e-12 * std::abs(separate));
}

TEST(JointCostTest, NearbyAgentsInteract) {
  const auto model = GroundTruthCost(ThetaStarPreset("defensive"), 8);
  const JointScene scene = FarScene(2, 3.0, 3);
  double separate = 0.0;
  for (const Demonstration& d : scene.agents) {
    separate += CostValue(*model, d.expert, d.env, d.history);
  }
  EXPECT_GT(std::abs(JointCost(*model, Experts(scene), scene) - separate), 1e-6);
}

TEST(JointCostTest, InvariantUnderAgentPermutation) {
  const auto model = GroundTruthCost(ThetaStarPreset("defensive"), 8);
  const JointScene scene = FarScene(3, 4.0, 4);
  const double base = JointCost(*model, Experts(scene), scene);
  std::vector<int> perm = {0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    JointScene p;
    for (int k : perm) p.agents.push_back(scene.agents[k]);
    EXPECT_NEAR(JointCost(*model, Experts(p), p), base, 1e-9 * std::abs(base));
  }
}

TEST(JointCostTest, PermutedAgentsGivePermutedGradients) {
  const auto model = GroundTruthCost(ThetaStarPreset("defensive"), 8);
  const JointScene scene = FarScene(2, 4.0, 5);
  JointScene swapped;
  swapped.agents = {scene.agents[1], scene.agents[0]};
  const SceneEnergy a(*model, scene.agents, 8);
  const SceneEnergy b(*model, swapped.agents, 8);
  Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(a.dim(), -0.2, 0.2);
  const int half = a.dim() / 2;
  Eigen::VectorXd zs(a.dim());
  zs << z.tail(half), z.head(half);
  Eigen::VectorXd ga, gb;
  EXPECT_NEAR(a.Evaluate(z, &ga), b.Evaluate(zs, &gb), 1e-9);
  EXPECT_LT((ga.head(half) - gb.tail(half)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((ga.tail(half) - gb.head(half)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(JointLangevinTest, SingleAgentReproducesLangevinSample) {
  const auto model = GroundTruthCost(ThetaStarPreset("lane_keeper"), 8);
  const JointScene scene = FarScene(1, 0.0, 6);
  SamplerConfig c;
  c.steps = 10;
  c.seed = 77;
  const Demonstration& d = scene.agents[0];
  const SolverResult single =
      LangevinSample(*model, HoldControls(d.history, 8),
                     d.history.initial_state(), d.env, d.history, c);
  const std::vector<SolverResult> joint = JointLangevin(*model, scene, c);
  ASSERT_EQ(joint.size(), 1u);
  EXPECT_EQ(joint[0].controls, single.controls);
  EXPECT_EQ(joint[0].trajectory, single.trajectory);
  EXPECT_EQ(joint[0].energy, single.energy);
}

TEST(JointLangevinTest, OneResultPerAgentWithinLimits) {
  const auto model = GroundTruthCost(ThetaStarPreset("defensive"), 8);
  const JointScene scene = FarScene(3, 4.0, 7);
  SamplerConfig c;
  c.steps = 12;
  const std::vector<SolverResult> r = JointLangevin(*model, scene, c);
  ASSERT_EQ(r.size(), 3u);
  const ControlLimits limits;
  for (const SolverResult& s : r) {
    ASSERT_EQ(s.controls.size(), 8);
    for (const Control& u : s.controls.controls) EXPECT_TRUE(limits.Contains(u));
  }
}

TEST(FlattenScenesTest, OthersBecomeObstacles) {
  const JointScene scene = FarScene(3, 5.0, 8);
  const auto flat = FlattenScenes({scene});
  ASSERT_EQ(flat.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(flat[k].env.obstacles.size(), 2u);
    EXPECT_EQ(flat[k].expert, scene.agents[k].expert);
  }
  EXPECT_EQ(flat[0].env.obstacles[0].positions[2].y,
            scene.agents[1].expert.states[2].y);
  EXPECT_EQ(FlattenScenes({scene}, false)[0].env.obstacles.size(), 0u);
}

TEST(TrainMultiagentTest, SingleAgentScenesMatchSingleAgentTraining) {
  std::vector<Demonstration> demos;
  std::vector<JointScene> scenes;
  for (uint64_t s = 0; s < 6; ++s) {
    demos.push_back(testing::RandomScene(s, 8));
    scenes.push_back({{demos.back()}});
  }
  TrainConfig c = DefaultTrainConfig(CostKind::kLinear);
  c.batch_size = 4;
  c.epochs = 3;
  c.sampler.steps = 5;
  c.seed = 3;
  const TrainResult single = TrainEbm(demos, CostConfig{}, c);
  const TrainResult joint = TrainMultiagent(scenes, CostConfig{}, c);
  EXPECT_TRUE(SameTrace(single.trace, joint.trace));
  EXPECT_EQ(single.model->params(), joint.model->params());
}

TEST(TrainMultiagentTest, RejectsInvalidScenes) {
  LinearCost model;
  EXPECT_THROW(TrainMultiagent({JointScene{}}, model, TrainConfig{}),
               StructuralError);
}

}  // namespace
}  // namespace ebioc
