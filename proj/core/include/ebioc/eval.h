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

// Displacement metrics over predicted trajectories, and the scripted
// corner-case suite.
//
// Step t of a trajectory is time (t + 1) * dt; a horizon of h seconds reads
// step round(h / dt) - 1.

#ifndef EBIOC_EVAL_H_
#define EBIOC_EVAL_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "ebioc/cost.h"
#include "ebioc/sampler.h"
#include "ebioc/serialization.h"
#include "ebioc/types.h"

namespace ebioc {

// sqrt(mean_i |pred_i(t) - gt_i(t)|^2) over (x, y).
double RmseAt(const std::vector<Trajectory>& predictions,
              const std::vector<Trajectory>& gts, int t);

// Root mean square displacement over every step of every pair.
double OverallRmse(const std::vector<Trajectory>& predictions,
                   const std::vector<Trajectory>& gts);

// |pred(t) - gt(t)|.
double DisplacementAt(const Trajectory& prediction, const Trajectory& gt,
                      int t);

int HorizonIndex(double horizon_seconds, double dt);

// samples[i] holds the M predictions of demonstration i.
using SampleSets = std::vector<std::vector<Trajectory>>;

struct RmseReport {
  std::vector<double> horizons;  // seconds
  std::vector<double> avg;       // mean over samples of the RMSE
  std::vector<double> min;       // RMSE of the per-demo best sample
  double missing_rate = 0.0;
  int num_demos = 0;
  int num_samples = 0;

  bool operator==(const RmseReport&) const = default;
};

// At every horizon the best sample of a demonstration is the one with the
// smallest displacement at that horizon's final step, which keeps
// min <= avg.
RmseReport AvgMinRmse(const SampleSets& samples,
                      const std::vector<Trajectory>& gts,
                      const std::vector<double>& horizons, double dt,
                      double radius = 1.0);

// Fraction of demonstrations whose samples all end farther than `radius`
// from the ground-truth final position.
double MissingRate(const SampleSets& samples,
                   const std::vector<Trajectory>& gts, double radius = 1.0);

// Mean over samples of the overall RMSE, and the overall RMSE of the
// per-demo sample with the smallest final displacement.
struct OverallRmsePair {
  double avg = 0.0;
  double min = 0.0;
};
OverallRmsePair OverallAvgMin(const SampleSets& samples,
                              const std::vector<Trajectory>& gts);

Json ToJson(const RmseReport& report);
RmseReport RmseReportFromJson(const Json& j);
// horizon,avg_rmse,min_rmse,missing_rate
void WriteRmseCsv(std::ostream& out, const RmseReport& report);

// Scripted behavioural scenes.
enum class CornerKind { kSuddenBrake, kCutIn, kCurvature };
std::string ToString(CornerKind kind);

struct CornerScene {
  std::string name;
  CornerKind kind;
  Demonstration scene;  // the expert is a constant-control placeholder
  int lead = -1;        // obstacle index of the lead vehicle, if any
};

struct CornerThresholds {
  double safety_gap = 2.0;         // m, sudden brake
  double max_lane_deviation = 1.5; // m, curvature
};

// Two sudden-brake scenes with neighbours, two cut-ins and two curves.
std::vector<CornerScene> CornerScenes(int horizon = 40, double dt = 0.1);

struct CornerResult {
  std::string name;
  std::string kind;
  bool passed = false;
  bool solver_failed = false;
  std::string error;
  double mean_accel = 0.0;
  double min_lead_distance = 0.0;
  double speed_change = 0.0;
  double max_lane_deviation = 0.0;
  Trajectory trajectory;
  // Absolute controls after every solver iteration, starting from the
  // initialization.
  std::vector<ControlSequence> control_trace;

  bool operator==(const CornerResult&) const = default;
};

struct CornerReport {
  std::vector<CornerResult> scenes;
  int passed = 0;

  bool operator==(const CornerReport&) const = default;
};

CornerReport CornerSuite(const CostModel& model, const SamplerConfig& solver,
                         const CornerThresholds& thresholds = {},
                         const DynamicsVariant& dynamics = {},
                         const FeatureConfig& features = {},
                         const ControlLimits& limits = {},
                         int workers = 1);

Json ToJson(const CornerReport& report);
CornerReport CornerReportFromJson(const Json& j);
// scene,langevin_step,t,accel,steer
void WriteControlTraceCsv(std::ostream& out, const CornerReport& report);

}  // namespace ebioc

#endif  // EBIOC_EVAL_H_
