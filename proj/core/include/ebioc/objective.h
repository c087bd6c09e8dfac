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

// Energies over control sequences.
//
// A scene is one or more agents (a single demonstration is the one-agent
// case). Each agent's controls are parameterized by normalized deltas z:
//
//   u_t = sat(u_0 + std * sum_{s<=t} z_s)
//
// where u_0 is the agent's last history control, std the normalizer's
// control scale and sat the control-limit saturation. The scene energy is
// the sum of per-agent costs; every agent sees the other agents' current
// rollouts as additional obstacles. Gradients flow back through features,
// dynamics (an adjoint recursion) and the z mapping.

#ifndef EBIOC_OBJECTIVE_H_
#define EBIOC_OBJECTIVE_H_

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ebioc/cost.h"
#include "ebioc/dynamics.h"
#include "ebioc/features.h"
#include "ebioc/types.h"

namespace ebioc {

// Differentiable scalar field used by the samplers.
class EnergyFunction {
 public:
  virtual ~EnergyFunction() = default;
  virtual int dim() const = 0;
  // Returns the energy; writes the gradient when `grad` is non-null.
  virtual double Evaluate(const Eigen::VectorXd& z,
                          Eigen::VectorXd* grad) const = 0;
};

struct SceneRollout {
  std::vector<ControlSequence> controls;  // absolute, saturated
  std::vector<Trajectory> trajectories;   // absolute-mode controls
};

class SceneEnergy : public EnergyFunction {
 public:
  // `agents` must outlive the energy. Expert trajectories are not read
  // except by the observed-side helpers below.
  SceneEnergy(const CostModel& model, std::span<const Demonstration> agents,
              int horizon, const DynamicsVariant& dynamics = {},
              const FeatureConfig& features = {},
              const ControlLimits& limits = {});

  int dim() const override { return num_agents() * horizon_ * 2; }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  int horizon() const { return horizon_; }
  const CostModel& model() const { return *model_; }
  const Demonstration& agent(int k) const { return agents_[k]; }
  const DynamicsVariant& dynamics() const { return dynamics_; }
  const FeatureConfig& features() const { return features_; }
  const ControlLimits& limits() const { return limits_; }

  double Evaluate(const Eigen::VectorXd& z,
                  Eigen::VectorXd* grad) const override;

  SceneRollout Rollout(const Eigen::VectorXd& z) const;
  // Inverse of the z mapping for in-bounds absolute controls.
  Eigen::VectorXd ToZ(const std::vector<ControlSequence>& controls) const;

  // Raw frame features of every agent, with the other agents' trajectories
  // acting as obstacles.
  std::vector<FrameFeatureMatrix> Frames(
      const std::vector<Trajectory>& trajectories) const;
  // Summed cost of the given trajectories; dC/dtheta into *d_params.
  double Cost(const std::vector<Trajectory>& trajectories,
              Eigen::VectorXd* d_params = nullptr) const;
  // Expert trajectories of every agent.
  std::vector<Trajectory> ExpertTrajectories() const;

 private:
  const CostModel* model_;
  std::span<const Demonstration> agents_;
  int horizon_;
  DynamicsVariant dynamics_;
  FeatureConfig features_;
  ControlLimits limits_;
};

struct GradReport {
  double value = 0.0;
  // dC/du, one row per step (accel, steer); delta-mode sequences receive
  // the gradient w.r.t. their increments
  Eigen::MatrixX2d d_controls;
  Eigen::VectorXd d_params;
};

// Cost value and gradients of one agent's control sequence, back-propagated
// through the unrolled dynamics without saturation.
GradReport GradWrtControls(const CostModel& model, const ControlSequence& seq,
                           const State& x0, const Environment& env,
                           const History& history,
                           const DynamicsVariant& dynamics = {},
                           const FeatureConfig& features = {});

// Adjoint pass for one agent. gx[t] = dC/dx_{t+1}, gu[t] = dC/du_{t+1}
// (explicit terms, including the previous-control terms already shifted to
// the control they belong to). Returns dC/du as T x 2.
Eigen::MatrixX2d BackpropThroughDynamics(const State& x0,
                                         const ControlSequence& absolute,
                                         const Trajectory& traj,
                                         const std::vector<Eigen::Vector4d>& gx,
                                         const Eigen::MatrixX2d& gu,
                                         const DynamicsVariant& dynamics);

}  // namespace ebioc

#endif  // EBIOC_OBJECTIVE_H_
