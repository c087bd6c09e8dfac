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

#include "ebioc/features.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ebioc/error.h"

namespace ebioc {
namespace {

double Sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

const std::array<std::string_view, kNumFeatures>& FeatureNames() {
  static const std::array<std::string_view, kNumFeatures> kNames = {
      "dist_goal_lon", "dist_goal_lat", "dist_lane_center",
      "speed_limit_diff", "lane_heading_diff", "accel_l2",
      "steer_l2", "accel_diff", "steer_diff",
      "nearest_obstacle_dist"};
  return kNames;
}

FeatureVector FrameFeatures(const FrameInput& in, const FeatureConfig& config,
                            FrameJacobian* jac) {
  const Environment& env = *in.env;
  const State& s = in.state;
  const Control& u = in.control;
  const Control& p = in.prev_control;
  FeatureVector f = FeatureVector::Zero();
  if (jac) {
    jac->d_state.setZero();
    jac->d_control.setZero();
    jac->d_prev_control.setZero();
    jac->d_obstacles.assign(in.obstacles.size(), Eigen::Vector2d::Zero());
  }

  if (in.final_frame) {
    const double ex = env.goal.x - s.x;
    const double ey = env.goal.y - s.y;
    f[kDistGoalLon] = std::abs(ex);
    f[kDistGoalLat] = std::abs(ey);
    if (jac) {
      jac->d_state(kDistGoalLon, 0) = -Sign(ex);
      jac->d_state(kDistGoalLat, 1) = -Sign(ey);
    }
  }

  const double lane_err = s.y - env.LaneOffset(s.x);
  f[kDistLaneCenter] = std::abs(lane_err);

  const double dv = s.v - env.speed_limit;
  f[kSpeedLimitDiff] = std::max(0.0, dv) * config.overspeed_weight +
                       config.speed_deviation_weight * std::abs(dv);

  const double slope = env.LaneSlope(s.x);
  const double head_err = s.h - std::atan(slope);
  f[kLaneHeadingDiff] = std::abs(head_err);

  f[kAccelL2] = u.accel * u.accel;
  f[kSteerL2] = u.steer * u.steer;
  const double da = u.accel - p.accel;
  const double ds = u.steer - p.steer;
  f[kAccelDiff] = da * da;
  f[kSteerDiff] = ds * ds;

  // soft minimum over obstacle distances and the cap, shifted for stability
  const double tau = config.softmin_temperature;
  const double eps2 = config.distance_epsilon * config.distance_epsilon;
  std::vector<double> dist(in.obstacles.size());
  double m = config.obstacle_cap;
  for (size_t j = 0; j < in.obstacles.size(); ++j) {
    const double ox = s.x - in.obstacles[j].x;
    const double oy = s.y - in.obstacles[j].y;
    dist[j] = std::sqrt(ox * ox + oy * oy + eps2);
    m = std::min(m, dist[j]);
  }
  double z = std::exp(-(config.obstacle_cap - m) / tau);
  std::vector<double> w(dist.size());
  for (size_t j = 0; j < dist.size(); ++j) {
    w[j] = std::exp(-(dist[j] - m) / tau);
    z += w[j];
  }
  f[kNearestObstacleDist] = m - tau * std::log(z);

  if (jac) {
    const double lane_sign = Sign(lane_err);
    jac->d_state(kDistLaneCenter, 0) = -lane_sign * slope;
    jac->d_state(kDistLaneCenter, 1) = lane_sign;

    jac->d_state(kSpeedLimitDiff, 2) =
        (dv > 0.0 ? config.overspeed_weight : 0.0) +
        config.speed_deviation_weight * Sign(dv);

    const double head_sign = Sign(head_err);
    jac->d_state(kLaneHeadingDiff, 3) = head_sign;
    jac->d_state(kLaneHeadingDiff, 0) =
        -head_sign * env.LaneSlopeRate(s.x) / (1.0 + slope * slope);

    jac->d_control(kAccelL2, 0) = 2.0 * u.accel;
    jac->d_control(kSteerL2, 1) = 2.0 * u.steer;
    jac->d_control(kAccelDiff, 0) = 2.0 * da;
    jac->d_prev_control(kAccelDiff, 0) = -2.0 * da;
    jac->d_control(kSteerDiff, 1) = 2.0 * ds;
    jac->d_prev_control(kSteerDiff, 1) = -2.0 * ds;

    for (size_t j = 0; j < dist.size(); ++j) {
      const double weight = w[j] / z / dist[j];
      const Eigen::Vector2d g(weight * (s.x - in.obstacles[j].x),
                              weight * (s.y - in.obstacles[j].y));
      jac->d_state(kNearestObstacleDist, 0) += g[0];
      jac->d_state(kNearestObstacleDist, 1) += g[1];
      jac->d_obstacles[j] = -g;
    }
  }
  return f;
}

std::vector<Point2> ObstaclesAt(const Environment& env, int t) {
  std::vector<Point2> out;
  out.reserve(env.obstacles.size());
  for (const OtherVehicleTrack& track : env.obstacles) {
    if (t < 0 || t >= static_cast<int>(track.positions.size())) {
      throw StructuralError("obstacle track has no position for frame " +
                            std::to_string(t));
    }
    out.push_back(track.positions[t]);
  }
  return out;
}

namespace {

ControlSequence AbsoluteControls(const Trajectory& traj,
                                 const History& history) {
  if (traj.controls.mode == ControlMode::kDelta) {
    return ToAbsolute(traj.controls, history.last_control());
  }
  return traj.controls;
}

FeatureVector FrameFeaturesAbs(const Trajectory& traj,
                               const ControlSequence& abs, int t,
                               const Environment& env, const History& history,
                               const FeatureConfig& config) {
  const std::vector<Point2> obstacles = ObstaclesAt(env, t);
  FrameInput in;
  in.state = traj.states[t];
  in.control = abs.controls[t];
  in.prev_control = t == 0 ? history.last_control() : abs.controls[t - 1];
  in.env = &env;
  in.obstacles = obstacles;
  in.final_frame = t == traj.size() - 1;
  return FrameFeatures(in, config);
}

}  // namespace

FeatureVector FrameFeatures(const Trajectory& traj, int t,
                            const Environment& env, const History& history,
                            const FeatureConfig& config) {
  if (t < 0 || t >= traj.size() || traj.controls.size() != traj.size()) {
    throw StructuralError("frame index out of range");
  }
  return FrameFeaturesAbs(traj, AbsoluteControls(traj, history), t, env,
                          history, config);
}

FrameFeatureMatrix FrameFeatureRows(const Trajectory& traj,
                                    const Environment& env,
                                    const History& history,
                                    const FeatureConfig& config) {
  if (traj.controls.size() != traj.size()) {
    throw StructuralError("trajectory has " + std::to_string(traj.size()) +
                          " states but " +
                          std::to_string(traj.controls.size()) + " controls");
  }
  const ControlSequence abs = AbsoluteControls(traj, history);
  FrameFeatureMatrix rows(traj.size(), kNumFeatures);
  for (int t = 0; t < traj.size(); ++t) {
    rows.row(t) =
        FrameFeaturesAbs(traj, abs, t, env, history, config).transpose();
  }
  return rows;
}

FeatureVector TrajectoryFeatures(const Trajectory& traj, const Environment& env,
                                 const History& history,
                                 const FeatureConfig& config) {
  return FrameFeatureRows(traj, env, history, config).colwise().sum();
}

FeatureNormalizer FeatureNormalizer::Identity(
    int reference_horizon, const Eigen::Vector2d& control_std) {
  FeatureNormalizer n;
  n.reference_horizon = reference_horizon;
  n.control_std = control_std;
  return n;
}

FeatureNormalizer FitNormalizer(std::span<const Demonstration> dataset,
                                const FeatureConfig& config,
                                double min_divisor) {
  if (dataset.empty()) throw StructuralError("cannot fit normalizer on no data");
  FeatureNormalizer n;
  n.divisor.setZero();
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Vector2d sum_sq = Eigen::Vector2d::Zero();
  double count = 0.0;
  long horizon_sum = 0;
  for (const Demonstration& demo : dataset) {
    n.divisor += TrajectoryFeatures(demo.expert, demo.env, demo.history, config)
                     .cwiseAbs();
    horizon_sum += demo.horizon();
    const ControlSequence abs =
        demo.expert.controls.mode == ControlMode::kDelta
            ? ToAbsolute(demo.expert.controls, demo.history.last_control())
            : demo.expert.controls;
    for (const Control& u : abs.controls) {
      const Eigen::Vector2d c(u.accel, u.steer);
      sum += c;
      count += 1.0;
    }
  }
  const double num = static_cast<double>(dataset.size());
  n.divisor /= num;
  for (int k = 0; k < kNumFeatures; ++k) {
    if (!(n.divisor[k] >= min_divisor)) n.divisor[k] = 1.0;
  }
  n.reference_horizon =
      std::max(1, static_cast<int>(std::lround(horizon_sum / num)));
  if (count == 0.0) throw StructuralError("dataset has no expert controls");
  n.control_mean = sum / count;
  for (const Demonstration& demo : dataset) {
    const ControlSequence abs =
        demo.expert.controls.mode == ControlMode::kDelta
            ? ToAbsolute(demo.expert.controls, demo.history.last_control())
            : demo.expert.controls;
    for (const Control& u : abs.controls) {
      const Eigen::Vector2d c =
          Eigen::Vector2d(u.accel, u.steer) - n.control_mean;
      sum_sq += c.cwiseProduct(c);
    }
  }
  static const char* kChannels[2] = {"accel", "steer"};
  for (int i = 0; i < 2; ++i) {
    const double var = sum_sq[i] / count;
    if (!(var > 1e-18)) {
      throw StructuralError(std::string("control channel '") + kChannels[i] +
                            "' has zero variance");
    }
    n.control_std[i] = std::sqrt(var);
  }
  return n;
}

EnvEncoding EncodeEnvironment(const Environment& env, const State& x0) {
  EnvEncoding e = EnvEncoding::Zero();
  for (int i = 0; i < 4; ++i) e[i] = env.lane[i];
  e[4] = env.speed_limit;
  e[5] = env.goal.x - x0.x;
  e[6] = env.goal.y - x0.y;
  e[7] = env.dt;

  struct Near {
    double d2;
    size_t index;
  };
  std::vector<Near> order;
  for (size_t j = 0; j < env.obstacles.size(); ++j) {
    const auto& pos = env.obstacles[j].positions;
    if (pos.empty()) continue;
    const double dx = pos[0].x - x0.x;
    const double dy = pos[0].y - x0.y;
    order.push_back({dx * dx + dy * dy, j});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Near& a, const Near& b) { return a.d2 < b.d2; });
  int slot = 8;
  for (size_t k = 0; k < order.size() && k < 4; ++k) {
    const auto& pos = env.obstacles[order[k].index].positions;
    e[slot++] = pos[0].x - x0.x;
    e[slot++] = pos[0].y - x0.y;
    if (pos.size() > 1) {
      e[slot++] = pos[1].x - pos[0].x;
      e[slot++] = pos[1].y - pos[0].y;
    } else {
      slot += 2;
    }
  }
  return e;
}

}  // namespace ebioc
