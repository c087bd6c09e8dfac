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

// Criteria that train cost models on synthetic expert data generated from
// known ground-truth weights.

#include <algorithm>
#include <cmath>
#include <random>

#include "acceptance/acceptance.h"
#include "ebioc/data.h"
#include "ebioc/learning.h"
#include "ebioc/multiagent.h"
#include "ebioc/objective.h"

namespace ebioc::acceptance {
namespace {

constexpr char kPreset[] = "lane_keeper";

// iLQR-optimal demonstrations without the Langevin jitter, so the experts
// are exact optimizers of the ground-truth cost.
std::vector<Demonstration> OptimalDemos(int count, uint64_t seed) {
  ScenarioSpec spec;
  spec.count = count;
  const auto truth = GroundTruthCost(ThetaStarPreset(kPreset), spec.horizon);
  ExpertConfig expert;
  expert.jitter_steps = 0;
  return GenExpertDemos(GenScenarios(spec, seed), *truth, expert, seed + 1);
}

TrainConfig MomentTrainConfig() {
  TrainConfig tc = DefaultTrainConfig(CostKind::kLinear);
  tc.sampler.kind = SolverKind::kIlqr;
  tc.epochs = 20;
  tc.batch_size = 25;
  tc.adam.learning_rate = 0.1;
  tc.seed = 404;
  return tc;
}

struct MomentRun {
  std::vector<Demonstration> demos;
  TrainResult result;
};

const MomentRun& TrainedModel() {
  static const MomentRun run = [] {
    MomentRun r;
    r.demos = OptimalDemos(500, 41);
    CostConfig cost;
    cost.linear_init = "zeros";
    r.result = TrainEbm(r.demos, cost, MomentTrainConfig());
    return r;
  }();
  return run;
}

std::string Vec(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += Format(i ? " %.3f" : "%.3f", v[i]);
  return s;
}

}  // namespace

Outcome MomentMatching() {
  const MomentRun& run = TrainedModel();
  const FeatureVector gap = MomentGap(*run.result.model,
                                      AsSingleAgentScenes(run.demos),
                                      MomentTrainConfig(), 7);
  const double worst = gap.cwiseAbs().maxCoeff();
  return {worst < 0.05,
          Format("500 demos, linear cost, ilqr synthesis; max |normalized "
                 "moment gap| %.4f (bound 0.05); gap [%s]; theta [%s]",
                 worst, Vec(gap).c_str(),
                 Vec(run.result.model->params()).c_str())};
}

Outcome CostRecoveryRanking() {
  constexpr int kScenes = 200;
  constexpr int kPerturbations = 20;
  const CostModel& model = *TrainedModel().result.model;
  const std::vector<Demonstration> held_out = OptimalDemos(kScenes, 4343);
  const double clamp = MomentTrainConfig().sampler.clamp;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(-clamp, clamp);
  int ranked = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const Demonstration& d : held_out) {
    const std::vector<Demonstration> agents = {d};
    const SceneEnergy energy(model, agents, d.horizon());
    const Eigen::VectorXd z = energy.ToZ({d.expert.controls});
    const double expert = energy.Evaluate(z, nullptr);
    double lowest = std::numeric_limits<double>::infinity();
    for (int p = 0; p < kPerturbations; ++p) {
      Eigen::VectorXd zp = z;
      for (int i = 0; i < zp.size(); ++i) zp[i] += u(rng);
      lowest = std::min(lowest, energy.Evaluate(zp, nullptr));
    }
    if (expert < lowest) ++ranked;
    worst_margin = std::min(worst_margin, lowest - expert);
  }
  const double frac = static_cast<double>(ranked) / kScenes;
  return {frac >= 0.95,
          Format("expert cheaper than all %d perturbations in %d/%d held-out "
                 "scenes (%.1f%%, bound 95%%); worst margin %.4g",
                 kPerturbations, ranked, kScenes, 100.0 * frac, worst_margin)};
}

Outcome MultiagentReduction() {
  // K = 1: bit-identical traces
  const std::vector<Demonstration> singles = OptimalDemos(40, 808);
  std::vector<JointScene> k1;
  for (const Demonstration& d : singles) k1.push_back(JointScene{{d}});
  TrainConfig tc = DefaultTrainConfig(CostKind::kLinear);
  tc.epochs = 3;
  tc.batch_size = 10;
  tc.seed = 17;
  const TrainResult joint1 = TrainMultiagent(k1, CostConfig{}, tc);
  const TrainResult flat1 = TrainEbm(singles, CostConfig{}, tc);
  const bool identical = SameTrace(joint1.trace, flat1.trace) &&
                         joint1.model->params() == flat1.model->params();

  // K = 4, agents 1 km apart on a straight road
  ScenarioSpec spec;
  spec.count = 25;
  spec.agents = 4;
  spec.agent_spacing = 1000.0;
  spec.lane_c1 = spec.lane_c2 = spec.lane_c3 = {0.0, 0.0};
  const auto truth = GroundTruthCost(ThetaStarPreset(kPreset), spec.horizon);
  const std::vector<JointScene> scenes = GenExpertScenes(
      GenJointScenarios(spec, 909), *truth, ExpertConfig{}, 910);
  TrainConfig full = DefaultTrainConfig(CostKind::kLinear);
  full.epochs = 10;
  full.seed = 23;
  full.batch_size = spec.count;
  const TrainResult joint = TrainMultiagent(scenes, CostConfig{}, full);
  const std::vector<Demonstration> flat = FlattenScenes(scenes);
  full.batch_size = static_cast<int>(flat.size());
  const TrainResult single = TrainEbm(flat, CostConfig{}, full);
  const Eigen::VectorXd& a = joint.model->params();
  const Eigen::VectorXd& b = single.model->params();
  const double rel = (a - b).cwiseAbs().maxCoeff() /
                     std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return {identical && rel < 1e-6,
          Format("K=1 trace and parameters bit-identical: %s; K=4 (%zu "
                 "agents, 1 km apart) vs flattened single-agent training: "
                 "max rel theta diff %.2e (bound 1e-6)",
                 identical ? "yes" : "no", flat.size(), rel)};
}

}  // namespace ebioc::acceptance
