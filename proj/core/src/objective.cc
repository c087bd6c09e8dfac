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

#include <algorithm>
#include <string>

#include "ebioc/error.h"

namespace ebioc {
namespace {

struct AgentFrames {
  FrameFeatureMatrix frames;
  std::vector<FrameJacobian> jacobians;
  // obstacle slot -> owning agent (-1 for static tracks)
  std::vector<int> obstacle_owner;
};

// Frame features of agent k; other agents act as obstacles.
AgentFrames ComputeFrames(int k, std::span<const Demonstration> agents,
                          const std::vector<Trajectory>& trajs,
                          const std::vector<ControlSequence>& controls,
                          const FeatureConfig& config, bool with_jacobians) {
  const Demonstration& agent = agents[k];
  const int horizon = trajs[k].size();
  AgentFrames out;
  out.frames.resize(horizon, kNumFeatures);
  if (with_jacobians) out.jacobians.resize(horizon);
  const int num_static = static_cast<int>(agent.env.obstacles.size());
  out.obstacle_owner.assign(num_static, -1);
  for (int j = 0; j < static_cast<int>(agents.size()); ++j) {
    if (j != k) out.obstacle_owner.push_back(j);
  }
  std::vector<Point2> obstacles;
  for (int t = 0; t < horizon; ++t) {
    obstacles = ObstaclesAt(agent.env, t);
    for (int j = 0; j < static_cast<int>(agents.size()); ++j) {
      if (j == k) continue;
      const State& s = trajs[j].states[t];
      obstacles.push_back({s.x, s.y});
    }
    FrameInput in;
    in.state = trajs[k].states[t];
    in.control = controls[k].controls[t];
    in.prev_control = t == 0 ? agent.history.last_control()
                             : controls[k].controls[t - 1];
    in.env = &agent.env;
    in.obstacles = obstacles;
    in.final_frame = t == horizon - 1;
    out.frames.row(t) =
        FrameFeatures(in, config, with_jacobians ? &out.jacobians[t] : nullptr)
            .transpose();
  }
  return out;
}

ControlSequence AbsoluteOf(const Trajectory& traj, const History& history) {
  if (traj.controls.mode == ControlMode::kDelta) {
    return ToAbsolute(traj.controls, history.last_control());
  }
  return traj.controls;
}

}  // namespace

SceneEnergy::SceneEnergy(const CostModel& model,
                         std::span<const Demonstration> agents, int horizon,
                         const DynamicsVariant& dynamics,
                         const FeatureConfig& features,
                         const ControlLimits& limits)
    : model_(&model),
      agents_(agents),
      horizon_(horizon),
      dynamics_(dynamics),
      features_(features),
      limits_(limits) {
  if (agents_.empty()) throw StructuralError("scene has no agents");
  if (horizon_ < 1) throw StructuralError("horizon must be positive");
  for (const Demonstration& a : agents_) {
    if (a.history.frames.empty()) throw StructuralError("agent has no history");
    for (const OtherVehicleTrack& track : a.env.obstacles) {
      if (static_cast<int>(track.positions.size()) < horizon_) {
        throw StructuralError("obstacle track shorter than the horizon");
      }
    }
  }
}

SceneRollout SceneEnergy::Rollout(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) {
    throw StructuralError("energy expects " + std::to_string(dim()) +
                          " variables, got " + std::to_string(z.size()));
  }
  const Eigen::Vector2d& std = model_->normalizer().control_std;
  SceneRollout r;
  for (int k = 0; k < num_agents(); ++k) {
    const Demonstration& agent = agents_[k];
    const Control& anchor = agent.history.last_control();
    Eigen::Vector2d acc(anchor.accel, anchor.steer);
    ControlSequence seq;
    seq.controls.resize(horizon_);
    for (int t = 0; t < horizon_; ++t) {
      acc += std.cwiseProduct(z.segment<2>(2 * (k * horizon_ + t)));
      seq.controls[t] = limits_.Saturate({acc[0], acc[1]});
    }
    r.trajectories.push_back(Unroll(agent.history.initial_state(), seq,
                                    dynamics_.WithDt(agent.env.dt)));
    r.controls.push_back(std::move(seq));
  }
  return r;
}

Eigen::VectorXd SceneEnergy::ToZ(
    const std::vector<ControlSequence>& controls) const {
  if (static_cast<int>(controls.size()) != num_agents()) {
    throw StructuralError("one control sequence per agent expected");
  }
  const Eigen::Vector2d& std = model_->normalizer().control_std;
  Eigen::VectorXd z(dim());
  for (int k = 0; k < num_agents(); ++k) {
    const ControlSequence abs =
        controls[k].mode == ControlMode::kDelta
            ? ToAbsolute(controls[k], agents_[k].history.last_control())
            : controls[k];
    if (abs.size() != horizon_) {
      throw StructuralError("control sequence length differs from horizon");
    }
    Control prev = agents_[k].history.last_control();
    for (int t = 0; t < horizon_; ++t) {
      const Control& u = abs.controls[t];
      z[2 * (k * horizon_ + t)] = (u.accel - prev.accel) / std[0];
      z[2 * (k * horizon_ + t) + 1] = (u.steer - prev.steer) / std[1];
      prev = u;
    }
  }
  return z;
}

std::vector<FrameFeatureMatrix> SceneEnergy::Frames(
    const std::vector<Trajectory>& trajectories) const {
  if (static_cast<int>(trajectories.size()) != num_agents()) {
    throw StructuralError("one trajectory per agent expected");
  }
  std::vector<ControlSequence> controls;
  for (int k = 0; k < num_agents(); ++k) {
    if (trajectories[k].size() != horizon_ ||
        trajectories[k].controls.size() != horizon_) {
      throw StructuralError("trajectory length differs from horizon");
    }
    controls.push_back(AbsoluteOf(trajectories[k], agents_[k].history));
  }
  std::vector<FrameFeatureMatrix> out;
  for (int k = 0; k < num_agents(); ++k) {
    out.push_back(
        ComputeFrames(k, agents_, trajectories, controls, features_, false)
            .frames);
  }
  return out;
}

double SceneEnergy::Cost(const std::vector<Trajectory>& trajectories,
                         Eigen::VectorXd* d_params) const {
  const std::vector<FrameFeatureMatrix> frames = Frames(trajectories);
  double total = 0.0;
  if (d_params) d_params->setZero(model_->num_params());
  Eigen::VectorXd g;
  for (const FrameFeatureMatrix& f : frames) {
    total += model_->Backward(f, nullptr, d_params ? &g : nullptr);
    if (d_params) *d_params += g;
  }
  return total;
}

std::vector<Trajectory> SceneEnergy::ExpertTrajectories() const {
  std::vector<Trajectory> out;
  for (const Demonstration& a : agents_) out.push_back(a.expert);
  return out;
}

double SceneEnergy::Evaluate(const Eigen::VectorXd& z,
                             Eigen::VectorXd* grad) const {
  const SceneRollout r = Rollout(z);
  const int n = num_agents();
  std::vector<AgentFrames> frames;
  frames.reserve(n);
  for (int k = 0; k < n; ++k) {
    frames.push_back(ComputeFrames(k, agents_, r.trajectories, r.controls,
                                   features_, grad != nullptr));
  }
  double total = 0.0;
  if (!grad) {
    for (int k = 0; k < n; ++k) total += model_->Value(frames[k].frames);
    return total;
  }

  std::vector<std::vector<Eigen::Vector4d>> gx(
      n, std::vector<Eigen::Vector4d>(horizon_, Eigen::Vector4d::Zero()));
  std::vector<Eigen::MatrixX2d> gu(n, Eigen::MatrixX2d::Zero(horizon_, 2));
  FrameFeatureMatrix df;
  for (int k = 0; k < n; ++k) {
    total += model_->Backward(frames[k].frames, &df, nullptr);
    for (int t = 0; t < horizon_; ++t) {
      const FrameJacobian& jac = frames[k].jacobians[t];
      const Eigen::Matrix<double, 1, kNumFeatures> w = df.row(t);
      gx[k][t] += (w * jac.d_state).transpose();
      gu[k].row(t) += w * jac.d_control;
      if (t > 0) gu[k].row(t - 1) += w * jac.d_prev_control;
      const auto& owners = frames[k].obstacle_owner;
      for (size_t o = 0; o < owners.size(); ++o) {
        if (owners[o] < 0) continue;
        gx[owners[o]][t].head<2>() +=
            w[kNearestObstacleDist] * jac.d_obstacles[o];
      }
    }
  }

  const Eigen::Vector2d& std = model_->normalizer().control_std;
  grad->setZero(dim());
  for (int k = 0; k < n; ++k) {
    const Demonstration& agent = agents_[k];
    Eigen::MatrixX2d du = BackpropThroughDynamics(
        agent.history.initial_state(), r.controls[k], r.trajectories[k], gx[k],
        gu[k], dynamics_.WithDt(agent.env.dt));
    // zero gradient where the accumulator sits outside the control limits
    const Control& anchor = agent.history.last_control();
    Eigen::Vector2d acc(anchor.accel, anchor.steer);
    for (int t = 0; t < horizon_; ++t) {
      acc += std.cwiseProduct(z.segment<2>(2 * (k * horizon_ + t)));
      if (std::abs(acc[0]) > limits_.accel_max) du(t, 0) = 0.0;
      if (std::abs(acc[1]) > limits_.steer_max) du(t, 1) = 0.0;
    }
    Eigen::Vector2d suffix = Eigen::Vector2d::Zero();
    for (int t = horizon_ - 1; t >= 0; --t) {
      suffix += du.row(t).transpose();
      grad->segment<2>(2 * (k * horizon_ + t)) = std.cwiseProduct(suffix);
    }
  }
  return total;
}

Eigen::MatrixX2d BackpropThroughDynamics(const State& x0,
                                         const ControlSequence& absolute,
                                         const Trajectory& traj,
                                         const std::vector<Eigen::Vector4d>& gx,
                                         const Eigen::MatrixX2d& gu,
                                         const DynamicsVariant& dynamics) {
  const int horizon = traj.size();
  Eigen::MatrixX2d du = gu;
  Eigen::Vector4d lambda = Eigen::Vector4d::Zero();
  for (int t = horizon - 1; t >= 0; --t) {
    const State& prev = t == 0 ? x0 : traj.states[t - 1];
    const StepJacobian jac =
        StepJacobians(prev, absolute.controls[t], dynamics);
    lambda += gx[t];
    du.row(t) += (jac.B.transpose() * lambda).transpose();
    lambda = jac.A.transpose() * lambda;
  }
  return du;
}

GradReport GradWrtControls(const CostModel& model, const ControlSequence& seq,
                           const State& x0, const Environment& env,
                           const History& history,
                           const DynamicsVariant& dynamics,
                           const FeatureConfig& features) {
  const DynamicsVariant dyn = dynamics.WithDt(env.dt);
  const ControlSequence abs = seq.mode == ControlMode::kDelta
                                  ? ToAbsolute(seq, history.last_control())
                                  : seq;
  const Trajectory traj = Unroll(x0, abs, dyn);
  History h = history;
  h.frames.back().state = x0;
  const std::vector<Demonstration> agents = {{h, env, traj}};
  const std::vector<Trajectory> trajs = {traj};
  const std::vector<ControlSequence> controls = {abs};
  const AgentFrames frames =
      ComputeFrames(0, agents, trajs, controls, features, true);

  GradReport report;
  FrameFeatureMatrix df;
  report.value = model.Backward(frames.frames, &df, &report.d_params);
  const int horizon = traj.size();
  std::vector<Eigen::Vector4d> gx(horizon, Eigen::Vector4d::Zero());
  Eigen::MatrixX2d gu = Eigen::MatrixX2d::Zero(horizon, 2);
  for (int t = 0; t < horizon; ++t) {
    const FrameJacobian& jac = frames.jacobians[t];
    const Eigen::Matrix<double, 1, kNumFeatures> w = df.row(t);
    gx[t] = (w * jac.d_state).transpose();
    gu.row(t) += w * jac.d_control;
    if (t > 0) gu.row(t - 1) += w * jac.d_prev_control;
  }
  report.d_controls = BackpropThroughDynamics(x0, abs, traj, gx, gu, dyn);
  if (seq.mode == ControlMode::kDelta) {
    for (int t = horizon - 2; t >= 0; --t) {
      report.d_controls.row(t) += report.d_controls.row(t + 1);
    }
  }
  return report;
}

}  // namespace ebioc
