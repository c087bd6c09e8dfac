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

// Several agents sharing one cost function. The joint cost is the sum of the
// agents' costs, where every agent sees the others' current trajectories as
// obstacles; sampling runs over the concatenated control vector.

#ifndef EBIOC_MULTIAGENT_H_
#define EBIOC_MULTIAGENT_H_

#include <vector>

#include "ebioc/cost.h"
#include "ebioc/learning.h"
#include "ebioc/sampler.h"
#include "ebioc/types.h"

namespace ebioc {

inline constexpr int kMaxAgents = 64;

// Throws StructuralError for empty scenes, more than kMaxAgents agents,
// mismatched horizons or time steps.
void ValidateScene(const JointScene& scene);

// Sum over agents of C(x^k, u^k, e, h^k).
double JointCost(const CostModel& model, const std::vector<Trajectory>& trajs,
                 const JointScene& scene, const FeatureConfig& features = {});

// Langevin over the joint controls from `z0` (zeros when empty). Agent k
// draws its noise from DeriveSeed(config.seed, "agent", {k}), so a one-agent
// scene reproduces LangevinSample.
std::vector<SolverResult> JointLangevin(const CostModel& model,
                                        const JointScene& scene,
                                        const SamplerConfig& config,
                                        const DynamicsVariant& dynamics = {},
                                        const FeatureConfig& features = {},
                                        const ControlLimits& limits = {},
                                        const Eigen::VectorXd& z0 = {});

// Every agent as its own demonstration; with `others_as_obstacles` the
// other agents' expert tracks are appended to its obstacles.
std::vector<Demonstration> FlattenScenes(const std::vector<JointScene>& scenes,
                                         bool others_as_obstacles = true);

// Normalizer fitted on the flattened agents.
TrainResult TrainMultiagent(const std::vector<JointScene>& scenes,
                            const CostConfig& cost, const TrainConfig& config);
TrainTrace TrainMultiagent(const std::vector<JointScene>& scenes,
                           CostModel& model, const TrainConfig& config);

}  // namespace ebioc

#endif  // EBIOC_MULTIAGENT_H_
