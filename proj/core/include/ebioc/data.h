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

// Synthetic highway scenarios, oracle expert demonstrations under a known
// linear cost, dataset splitting and ingestion of position-only tracks.

#ifndef EBIOC_DATA_H_
#define EBIOC_DATA_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ebioc/cost.h"
#include "ebioc/dynamics.h"
#include "ebioc/error.h"
#include "ebioc/features.h"
#include "ebioc/sampler.h"
#include "ebioc/serialization.h"
#include "ebioc/types.h"

namespace ebioc {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Range&) const = default;
};

struct ScenarioSpec {
  int count = 100;
  int horizon = 40;  // T
  double dt = 0.1;
  int history = 9;   // k; frames -k..0
  // lane y = c0 + c1 x + c2 x^2 + c3 x^3
  Range lane_c0 = {-0.5, 0.5};
  Range lane_c1 = {-0.02, 0.02};
  Range lane_c2 = {-2e-3, 2e-3};
  Range lane_c3 = {-1e-5, 1e-5};
  Range speed = {8.0, 16.0};
  Range speed_limit = {10.0, 16.0};
  Range lateral_offset = {-0.6, 0.6};  // ego from lane centre at frame -k
  Range heading_offset = {-0.03, 0.03};
  Range warmup_accel = {-0.5, 0.5};    // constant history control
  Range warmup_steer = {-0.01, 0.01};
  // goal on the lane centre, this factor times the constant-speed distance
  // ahead of x_0
  Range goal_distance = {0.85, 1.1};
  int min_obstacles = 0;
  int max_obstacles = 2;
  Range obstacle_gap = {-25.0, 40.0};   // longitudinal, from x_0
  Range obstacle_speed = {6.0, 16.0};
  double lane_width = 3.7;
  double min_clearance = 8.0;  // obstacle-to-ego distance at t = 0
  int max_retries = 100;
  // joint scenes: agents per scene and their longitudinal spacing
  int agents = 1;
  double agent_spacing = 30.0;

  bool operator==(const ScenarioSpec&) const = default;
};

// Throws ConfigError on empty ranges or non-positive sizes.
void Validate(const ScenarioSpec& spec);

struct Scenario {
  History history;
  Environment env;

  bool operator==(const Scenario&) const = default;
};

// Reproducible for a seed; obstacles that start inside the clearance radius
// are redrawn up to max_retries times before ConfigError.
std::vector<Scenario> GenScenarios(const ScenarioSpec& spec, uint64_t seed);

// Scenes of spec.agents agents spaced along the road; each agent's
// environment holds the shared obstacles.
std::vector<std::vector<Scenario>> GenJointScenarios(const ScenarioSpec& spec,
                                                     uint64_t seed);

// Ground-truth weights over raw (unnormalized) features.
std::vector<std::string> ThetaStarPresets();
FeatureVector ThetaStarPreset(const std::string& name);
// Linear cost with identity feature scaling; control_std sets the
// sampler's delta scale.
std::unique_ptr<CostModel> GroundTruthCost(
    const FeatureVector& theta, int horizon,
    const Eigen::Vector2d& control_std = Eigen::Vector2d(1.0, 0.05));

struct ExpertConfig {
  SamplerConfig solver;  // iLQR by default
  int jitter_steps = 4;  // Langevin steps after the solver; 0 disables
  double jitter_step_size = 0.005;
  DynamicsVariant dynamics;
  FeatureConfig features;
  ControlLimits limits;
  int workers = 1;

  ExpertConfig() { solver.kind = SolverKind::kIlqr; }
};

// Solves every scenario under `theta_star`; failed scenarios are logged and
// dropped.
std::vector<Demonstration> GenExpertDemos(const std::vector<Scenario>& scenarios,
                                          const CostModel& theta_star,
                                          const ExpertConfig& config,
                                          uint64_t seed);
// Joint version: agents of a scene are solved together.
std::vector<JointScene> GenExpertScenes(
    const std::vector<std::vector<Scenario>>& scenes,
    const CostModel& theta_star, const ExpertConfig& config, uint64_t seed);

// round(ratio * n) demonstrations go to the first part. Throws ConfigError
// unless 0 < ratio < 1.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> Split(const std::vector<T>& dataset,
                                                double ratio, uint64_t seed);
std::vector<size_t> SplitPermutation(size_t n, uint64_t seed);

// Positions of frames -k..T sampled at env.dt.
struct PositionTrack {
  std::vector<Point2> positions;
  Environment env;
  int history = 9;
  bool has_goal = false;  // otherwise the goal is the last position

  bool operator==(const PositionTrack&) const = default;
};

struct IngestOptions {
  double max_rmse = 2.0;
  // points used to estimate the initial speed and heading
  int initial_fit_points = 10;
  InferOptions infer;
  DynamicsVariant dynamics;
};

struct IngestRejection {
  int index = 0;
  double rmse = 0.0;
  std::string reason;
};

struct IngestReport {
  std::vector<Demonstration> dataset;
  std::vector<double> rmse;  // fit RMSE of every accepted track
  std::vector<IngestRejection> rejected;
};

// Infers the controls of every track and re-unrolls its states.
IngestReport IngestTracks(const std::vector<PositionTrack>& tracks,
                          const IngestOptions& options = {});

// Track of a demonstration: history positions followed by the expert's.
PositionTrack TrackOf(const Demonstration& demo);

Json ToJson(const PositionTrack& track);
PositionTrack PositionTrackFromJson(const Json& j);
std::vector<PositionTrack> ReadTracks(const std::string& path);

// Template implementation.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> Split(const std::vector<T>& dataset,
                                                double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError("split ratio must lie strictly between 0 and 1");
  }
  const std::vector<size_t> perm = SplitPermutation(dataset.size(), seed);
  const size_t first = static_cast<size_t>(
      std::llround(ratio * static_cast<double>(dataset.size())));
  std::pair<std::vector<T>, std::vector<T>> out;
  for (size_t i = 0; i < perm.size(); ++i) {
    (i < first ? out.first : out.second).push_back(dataset[perm[i]]);
  }
  return out;
}

}  // namespace ebioc

#endif  // EBIOC_DATA_H_
