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

#include "ebioc/error.h"
#include "ebioc/objective.h"
#include "ebioc/random.h"

namespace ebioc {

void ValidateScene(const JointScene& scene) {
  if (scene.agents.empty()) throw StructuralError("scene has no agents");
  if (scene.size() > kMaxAgents) {
    throw StructuralError("scene has " + std::to_string(scene.size()) +
                          " agents, at most " + std::to_string(kMaxAgents) +
                          " are supported");
  }
  const Demonstration& first = scene.agents.front();
  for (const Demonstration& a : scene.agents) {
    if (a.horizon() != first.horizon()) {
      throw StructuralError("agents of a scene have different horizons");
    }
    if (a.env.dt != first.env.dt) {
      throw StructuralError("agents of a scene have different time steps");
    }
  }
}

double JointCost(const CostModel& model, const std::vector<Trajectory>& trajs,
                 const JointScene& scene, const FeatureConfig& features) {
  ValidateScene(scene);
  const SceneEnergy energy(model, scene.agents, scene.agents.front().horizon(),
                           {}, features);
  return energy.Cost(trajs);
}

std::vector<SolverResult> JointLangevin(const CostModel& model,
                                        const JointScene& scene,
                                        const SamplerConfig& config,
                                        const DynamicsVariant& dynamics,
                                        const FeatureConfig& features,
                                        const ControlLimits& limits,
                                        const Eigen::VectorXd& z0) {
  ValidateScene(scene);
  const SceneEnergy energy(model, scene.agents, scene.agents.front().horizon(),
                           dynamics.WithDt(scene.agents.front().env.dt),
                           features, limits);
  SamplerConfig c = config;
  c.kind = SolverKind::kLangevin;
  return SolveScene(energy,
                    z0.size() == 0 ? Eigen::VectorXd::Zero(energy.dim()) : z0,
                    c);
}

std::vector<Demonstration> FlattenScenes(const std::vector<JointScene>& scenes,
                                         bool others_as_obstacles) {
  std::vector<Demonstration> out;
  for (const JointScene& scene : scenes) {
    for (int k = 0; k < scene.size(); ++k) {
      Demonstration d = scene.agents[k];
      if (others_as_obstacles) {
        for (int j = 0; j < scene.size(); ++j) {
          if (j == k) continue;
          OtherVehicleTrack track;
          for (const State& s : scene.agents[j].expert.states) {
            track.positions.push_back({s.x, s.y});
          }
          d.env.obstacles.push_back(std::move(track));
        }
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

TrainTrace TrainMultiagent(const std::vector<JointScene>& scenes,
                           CostModel& model, const TrainConfig& config) {
  for (const JointScene& s : scenes) ValidateScene(s);
  return TrainScenes(scenes, model, config);
}

TrainResult TrainMultiagent(const std::vector<JointScene>& scenes,
                            const CostConfig& cost, const TrainConfig& config) {
  if (scenes.empty()) throw StructuralError("cannot train on an empty dataset");
  const FeatureNormalizer norm =
      FitNormalizer(FlattenScenes(scenes), config.features);
  TrainResult out;
  out.model = MakeCost(cost, norm, norm.reference_horizon,
                       DeriveSeed(config.seed, "init"));
  out.trace = TrainMultiagent(scenes, *out.model, config);
  return out;
}

}  // namespace ebioc
