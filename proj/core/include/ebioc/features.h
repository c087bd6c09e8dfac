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

// Hand-crafted per-frame features, their analytic Jacobians, trajectory
// aggregation and dataset-fitted normalization.
//
// Frame t (0-based) of a horizon-T trajectory sees the state x_{t+1}, the
// control u_{t+1}, the previous control u_t (u_0 is the last history
// control) and the obstacle positions of that frame. Feature formulas:
//
//   dist_goal_lon         |goal.x - x|   on the final frame, else 0
//   dist_goal_lat         |goal.y - y|   on the final frame, else 0
//   dist_lane_center      |y - lane(x)|
//   speed_limit_diff      max(0, v - limit) + 0.1 |v - limit|
//   lane_heading_diff     |h - atan(lane'(x))|
//   accel_l2, steer_l2    a^2, steer^2
//   accel_diff            (a - a_prev)^2
//   steer_diff            (steer - steer_prev)^2
//   nearest_obstacle_dist -tau log(sum_j exp(-d_j / tau) + exp(-cap / tau))
//
// The last one is a soft minimum of the obstacle distances that includes
// the cap itself, so it equals the cap exactly without obstacles, never
// exceeds it and stays differentiable.

#ifndef EBIOC_FEATURES_H_
#define EBIOC_FEATURES_H_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ebioc/types.h"

namespace ebioc {

inline constexpr int kNumFeatures = 10;

enum FeatureIndex : int {
  kDistGoalLon = 0,
  kDistGoalLat = 1,
  kDistLaneCenter = 2,
  kSpeedLimitDiff = 3,
  kLaneHeadingDiff = 4,
  kAccelL2 = 5,
  kSteerL2 = 6,
  kAccelDiff = 7,
  kSteerDiff = 8,
  kNearestObstacleDist = 9,
};

const std::array<std::string_view, kNumFeatures>& FeatureNames();

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;
// one row per frame
using FrameFeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, kNumFeatures, Eigen::RowMajor>;

struct FeatureConfig {
  double obstacle_cap = 50.0;         // m
  double softmin_temperature = 1.0;   // m
  double overspeed_weight = 1.0;
  double speed_deviation_weight = 0.1;
  // distances are sqrt(dx^2 + dy^2 + eps^2)
  double distance_epsilon = 1e-6;
};

struct FrameInput {
  State state;
  Control control;
  Control prev_control;
  const Environment* env = nullptr;
  std::span<const Point2> obstacles;
  bool final_frame = false;
};

struct FrameJacobian {
  Eigen::Matrix<double, kNumFeatures, 4> d_state;
  Eigen::Matrix<double, kNumFeatures, 2> d_control;
  Eigen::Matrix<double, kNumFeatures, 2> d_prev_control;
  // gradient of nearest_obstacle_dist w.r.t. each obstacle position
  std::vector<Eigen::Vector2d> d_obstacles;
};

FeatureVector FrameFeatures(const FrameInput& in, const FeatureConfig& config,
                            FrameJacobian* jacobian = nullptr);

// Positions of the environment's obstacle tracks at frame t.
std::vector<Point2> ObstaclesAt(const Environment& env, int t);

// Trajectory-level forms. Delta-mode controls are reconstructed from the
// history's last control.
FeatureVector FrameFeatures(const Trajectory& traj, int t,
                            const Environment& env, const History& history,
                            const FeatureConfig& config = {});
FrameFeatureMatrix FrameFeatureRows(const Trajectory& traj,
                                    const Environment& env,
                                    const History& history,
                                    const FeatureConfig& config = {});
// phi(x, u, e, h) = sum over frames
FeatureVector TrajectoryFeatures(const Trajectory& traj, const Environment& env,
                                 const History& history,
                                 const FeatureConfig& config = {});

// Divides trajectory features by their training-set mean magnitude and maps
// controls to zero mean, unit variance. Frame features fed to neural costs
// are scaled by reference_horizon / divisor so a typical frame is O(1).
struct FeatureNormalizer {
  FeatureVector divisor = FeatureVector::Ones();
  int reference_horizon = 40;
  Eigen::Vector2d control_mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d control_std = Eigen::Vector2d::Ones();

  FeatureVector Apply(const FeatureVector& aggregate) const {
    return aggregate.cwiseQuotient(divisor);
  }
  FeatureVector Invert(const FeatureVector& normalized) const {
    return normalized.cwiseProduct(divisor);
  }
  FeatureVector FrameScale() const {
    return FeatureVector::Constant(reference_horizon).cwiseQuotient(divisor);
  }
  Eigen::Vector2d NormalizeControl(const Control& u) const {
    return (Eigen::Vector2d(u.accel, u.steer) - control_mean)
        .cwiseQuotient(control_std);
  }
  Control DenormalizeControl(const Eigen::Vector2d& n) const {
    const Eigen::Vector2d u = n.cwiseProduct(control_std) + control_mean;
    return {u[0], u[1]};
  }

  // unit divisors; control_std sets the sampler's delta-control scale
  static FeatureNormalizer Identity(
      int reference_horizon,
      const Eigen::Vector2d& control_std = Eigen::Vector2d(1.0, 0.05));

  bool operator==(const FeatureNormalizer&) const = default;
};

// Throws StructuralError on an empty dataset or when a control channel has
// zero variance. Feature divisors below `min_divisor` are replaced by 1.
FeatureNormalizer FitNormalizer(std::span<const Demonstration> dataset,
                                const FeatureConfig& config = {},
                                double min_divisor = 1e-9);

// Fixed-width environment encoding consumed by the policy generator:
// [c0..c3, speed_limit, goal - x0 (2), dt] followed by the 4 obstacles
// nearest to x0 at the first frame as (dx, dy, per-step dx, per-step dy),
// zero-padded to 29 entries.
inline constexpr int kEnvEncodingDim = 29;
using EnvEncoding = Eigen::Matrix<double, kEnvEncodingDim, 1>;
EnvEncoding EncodeEnvironment(const Environment& env, const State& x0);

}  // namespace ebioc

#endif  // EBIOC_FEATURES_H_
