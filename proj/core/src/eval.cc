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

#include "ebioc/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ebioc/dynamics.h"
#include "ebioc/error.h"
#include "ebioc/parallel.h"
#include "ebioc/random.h"

namespace ebioc {
namespace {

void CheckAligned(size_t predictions, size_t gts) {
  if (predictions != gts) {
    throw StructuralError("got " + std::to_string(predictions) +
                          " predictions for " + std::to_string(gts) +
                          " ground truths");
  }
}

double Squared(const State& a, const State& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void CheckStep(const Trajectory& p, const Trajectory& g, int t) {
  if (t < 0 || t >= p.size() || t >= g.size()) {
    throw StructuralError("step " + std::to_string(t) +
                          " is outside the trajectories");
  }
}

void CheckSamples(const SampleSets& samples,
                  const std::vector<Trajectory>& gts) {
  CheckAligned(samples.size(), gts.size());
  for (const auto& set : samples) {
    if (set.empty()) throw StructuralError("demonstration without samples");
  }
}

Json ControlsJson(const ControlSequence& seq) {
  Json out = Json::array();
  for (const Control& u : seq.controls) out.push_back({u.accel, u.steer});
  return out;
}

ControlSequence ControlsFromJson(const Json& j) {
  ControlSequence seq;
  for (const Json& u : j) {
    seq.controls.push_back({u.at(0).get<double>(), u.at(1).get<double>()});
  }
  return seq;
}

}  // namespace

double DisplacementAt(const Trajectory& prediction, const Trajectory& gt,
                      int t) {
  CheckStep(prediction, gt, t);
  return std::sqrt(Squared(prediction.states[t], gt.states[t]));
}

double RmseAt(const std::vector<Trajectory>& predictions,
              const std::vector<Trajectory>& gts, int t) {
  CheckAligned(predictions.size(), gts.size());
  if (gts.empty()) throw StructuralError("no trajectories to compare");
  double sum = 0.0;
  for (size_t i = 0; i < gts.size(); ++i) {
    CheckStep(predictions[i], gts[i], t);
    sum += Squared(predictions[i].states[t], gts[i].states[t]);
  }
  return std::sqrt(sum / static_cast<double>(gts.size()));
}

double OverallRmse(const std::vector<Trajectory>& predictions,
                   const std::vector<Trajectory>& gts) {
  CheckAligned(predictions.size(), gts.size());
  double sum = 0.0;
  long count = 0;
  for (size_t i = 0; i < gts.size(); ++i) {
    if (predictions[i].size() != gts[i].size()) {
      throw StructuralError("trajectory lengths differ");
    }
    for (int t = 0; t < gts[i].size(); ++t) {
      sum += Squared(predictions[i].states[t], gts[i].states[t]);
      ++count;
    }
  }
  if (count == 0) throw StructuralError("no trajectories to compare");
  return std::sqrt(sum / static_cast<double>(count));
}

int HorizonIndex(double horizon_seconds, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const long index = std::lround(horizon_seconds / dt) - 1;
  if (index < 0) {
    throw ConfigError("horizon " + std::to_string(horizon_seconds) +
                      " s is shorter than one step");
  }
  return static_cast<int>(index);
}

RmseReport AvgMinRmse(const SampleSets& samples,
                      const std::vector<Trajectory>& gts,
                      const std::vector<double>& horizons, double dt,
                      double radius) {
  CheckSamples(samples, gts);
  if (gts.empty()) throw StructuralError("no demonstrations to evaluate");
  RmseReport report;
  report.horizons = horizons;
  report.num_demos = static_cast<int>(gts.size());
  report.num_samples = static_cast<int>(samples.front().size());
  const double n = static_cast<double>(gts.size());
  for (double h : horizons) {
    const int t = HorizonIndex(h, dt);
    double avg = 0.0;
    double best = 0.0;
    for (size_t i = 0; i < gts.size(); ++i) {
      double mean = 0.0;
      double lowest = std::numeric_limits<double>::infinity();
      for (const Trajectory& s : samples[i]) {
        CheckStep(s, gts[i], t);
        const double e = Squared(s.states[t], gts[i].states[t]);
        mean += e;
        lowest = std::min(lowest, e);
      }
      avg += mean / static_cast<double>(samples[i].size());
      best += lowest;
    }
    // avg is the mean over sample slots of each slot's RMSE when every
    // demonstration has the same number of samples
    double slot_avg = 0.0;
    bool uniform = true;
    for (const auto& set : samples) {
      uniform = uniform && set.size() == samples.front().size();
    }
    if (uniform) {
      const size_t m = samples.front().size();
      for (size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (size_t i = 0; i < gts.size(); ++i) {
          sum += Squared(samples[i][j].states[t], gts[i].states[t]);
        }
        slot_avg += std::sqrt(sum / n);
      }
      slot_avg /= static_cast<double>(m);
    } else {
      slot_avg = std::sqrt(avg / n);
    }
    report.avg.push_back(slot_avg);
    report.min.push_back(std::sqrt(best / n));
  }
  report.missing_rate = MissingRate(samples, gts, radius);
  return report;
}

double MissingRate(const SampleSets& samples,
                   const std::vector<Trajectory>& gts, double radius) {
  CheckSamples(samples, gts);
  if (gts.empty()) return 0.0;
  int missed = 0;
  for (size_t i = 0; i < gts.size(); ++i) {
    const int t = gts[i].size() - 1;
    bool hit = false;
    for (const Trajectory& s : samples[i]) {
      hit = hit || DisplacementAt(s, gts[i], t) <= radius;
    }
    if (!hit) ++missed;
  }
  return static_cast<double>(missed) / static_cast<double>(gts.size());
}

OverallRmsePair OverallAvgMin(const SampleSets& samples,
                              const std::vector<Trajectory>& gts) {
  CheckSamples(samples, gts);
  bool uniform = !samples.empty();
  for (const auto& set : samples) {
    uniform = uniform && set.size() == samples.front().size();
  }
  const size_t m = uniform ? samples.front().size() : 0;
  std::vector<double> slot_sum(m, 0.0);
  OverallRmsePair out;
  double best_sum = 0.0;
  double avg_sum = 0.0;
  long count = 0;
  for (size_t i = 0; i < gts.size(); ++i) {
    const int last = gts[i].size() - 1;
    double sample_mean = 0.0;
    double best_end = std::numeric_limits<double>::infinity();
    double best_sq = 0.0;
    for (size_t j = 0; j < samples[i].size(); ++j) {
      const Trajectory& s = samples[i][j];
      if (s.size() != gts[i].size()) {
        throw StructuralError("trajectory lengths differ");
      }
      double sq = 0.0;
      for (int t = 0; t < gts[i].size(); ++t) {
        sq += Squared(s.states[t], gts[i].states[t]);
      }
      sample_mean += sq;
      if (uniform) slot_sum[j] += sq;
      const double end = Squared(s.states[last], gts[i].states[last]);
      if (end < best_end) {
        best_end = end;
        best_sq = sq;
      }
    }
    avg_sum += sample_mean / static_cast<double>(samples[i].size());
    best_sum += best_sq;
    count += gts[i].size();
  }
  if (count == 0) throw StructuralError("no trajectories to compare");
  const double n = static_cast<double>(count);
  // same convention as AvgMinRmse: mean over sample slots of the slot RMSE
  if (uniform) {
    for (double sum : slot_sum) out.avg += std::sqrt(sum / n);
    out.avg /= static_cast<double>(m);
  } else {
    out.avg = std::sqrt(avg_sum / n);
  }
  out.min = std::sqrt(best_sum / n);
  return out;
}

Json ToJson(const RmseReport& r) {
  return {{"horizons", r.horizons},       {"avg_rmse", r.avg},
          {"min_rmse", r.min},            {"missing_rate", r.missing_rate},
          {"num_demos", r.num_demos},     {"num_samples", r.num_samples}};
}

RmseReport RmseReportFromJson(const Json& j) {
  RmseReport r;
  try {
    r.horizons = j.at("horizons").get<std::vector<double>>();
    r.avg = j.at("avg_rmse").get<std::vector<double>>();
    r.min = j.at("min_rmse").get<std::vector<double>>();
    r.missing_rate = j.at("missing_rate").get<double>();
    r.num_demos = j.at("num_demos").get<int>();
    r.num_samples = j.at("num_samples").get<int>();
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed RMSE report: ") + e.what());
  }
  return r;
}

void WriteRmseCsv(std::ostream& out, const RmseReport& r) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "horizon,avg_rmse,min_rmse,missing_rate\n";
  for (size_t i = 0; i < r.horizons.size(); ++i) {
    out << r.horizons[i] << ',' << r.avg[i] << ',' << r.min[i] << ','
        << r.missing_rate << '\n';
  }
  out.precision(old);
}

std::string ToString(CornerKind kind) {
  switch (kind) {
    case CornerKind::kSuddenBrake:
      return "sudden_brake";
    case CornerKind::kCutIn:
      return "cut_in";
    case CornerKind::kCurvature:
      return "curvature";
  }
  return "unknown";
}

namespace {

History ConstantHistory(const State& x0, int k, double dt) {
  History h;
  for (int i = -k; i <= 0; ++i) {
    State s = x0;
    s.x += x0.v * std::cos(x0.h) * dt * i;
    s.y += x0.v * std::sin(x0.h) * dt * i;
    h.frames.push_back({s, {0.0, 0.0}});
  }
  return h;
}

// Lead vehicle on y = lane_y starting at x0 with speed v0 and constant
// deceleration `brake` until it stops.
OtherVehicleTrack BrakingTrack(double x0, double lane_y, double v0,
                               double brake, int horizon, double dt) {
  OtherVehicleTrack track;
  const double stop = v0 / brake;
  for (int t = 0; t < horizon; ++t) {
    const double tau = std::min((t + 1) * dt, stop);
    track.positions.push_back({x0 + v0 * tau - 0.5 * brake * tau * tau, lane_y});
  }
  return track;
}

OtherVehicleTrack CruisingTrack(double x0, double lane_y, double v,
                                int horizon, double dt) {
  OtherVehicleTrack track;
  for (int t = 0; t < horizon; ++t) {
    track.positions.push_back({x0 + v * (t + 1) * dt, lane_y});
  }
  return track;
}

// Vehicle moving at speed v that merges from lateral offset y_from to y_to
// over `merge_time` seconds along a smoothstep profile.
OtherVehicleTrack MergingTrack(double x0, double y_from, double y_to, double v,
                               double merge_time, int horizon, double dt) {
  OtherVehicleTrack track;
  for (int t = 0; t < horizon; ++t) {
    const double tau = (t + 1) * dt;
    const double s = std::min(1.0, tau / merge_time);
    const double blend = s * s * (3.0 - 2.0 * s);
    track.positions.push_back({x0 + v * tau, y_from + (y_to - y_from) * blend});
  }
  return track;
}

CornerScene Finish(std::string name, CornerKind kind, Demonstration d,
                   int lead, int horizon) {
  ControlSequence hold;
  hold.controls.assign(horizon, d.history.last_control());
  d.expert = Unroll(d.history.initial_state(), hold, {}, {});
  return {std::move(name), kind, std::move(d), lead};
}

}  // namespace

std::vector<CornerScene> CornerScenes(int horizon, double dt) {
  constexpr int kHistory = 9;
  constexpr double kLaneWidth = 3.7;
  std::vector<CornerScene> out;
  const double end = horizon * dt;

  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 20.0;
    d.history = ConstantHistory({0.0, 0.0, 15.0, 0.0}, kHistory, dt);
    d.env.obstacles.push_back(BrakingTrack(25.0, 0.0, 15.0, 5.0, horizon, dt));
    d.env.obstacles.push_back(
        CruisingTrack(-4.0, kLaneWidth, 15.0, horizon, dt));
    d.env.obstacles.push_back(
        CruisingTrack(3.0, -kLaneWidth, 15.0, horizon, dt));
    d.env.goal = {d.env.obstacles[0].positions.back().x - 12.0, 0.0};
    out.push_back(Finish("brake_boxed_in", CornerKind::kSuddenBrake,
                         std::move(d), 0, horizon));
  }
  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 25.0;
    d.history = ConstantHistory({0.0, 0.0, 18.0, 0.0}, kHistory, dt);
    d.env.obstacles.push_back(BrakingTrack(35.0, 0.0, 18.0, 4.0, horizon, dt));
    d.env.obstacles.push_back(
        CruisingTrack(-8.0, kLaneWidth, 18.0, horizon, dt));
    d.env.goal = {d.env.obstacles[0].positions.back().x - 12.0, 0.0};
    out.push_back(Finish("brake_one_neighbour", CornerKind::kSuddenBrake,
                         std::move(d), 0, horizon));
  }
  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 20.0;
    d.history = ConstantHistory({0.0, 0.0, 15.0, 0.0}, kHistory, dt);
    d.env.obstacles.push_back(
        MergingTrack(10.0, kLaneWidth, 0.0, 12.0, 2.0, horizon, dt));
    d.env.goal = {10.0 + 12.0 * end - 12.0, 0.0};
    out.push_back(Finish("cut_in_left", CornerKind::kCutIn, std::move(d), 0,
                         horizon));
  }
  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 20.0;
    d.history = ConstantHistory({0.0, 0.0, 14.0, 0.0}, kHistory, dt);
    d.env.obstacles.push_back(
        MergingTrack(6.0, -kLaneWidth, 0.0, 11.0, 1.5, horizon, dt));
    d.env.obstacles.push_back(
        CruisingTrack(-10.0, kLaneWidth, 14.0, horizon, dt));
    d.env.goal = {6.0 + 11.0 * end - 12.0, 0.0};
    out.push_back(Finish("cut_in_right", CornerKind::kCutIn, std::move(d), 0,
                         horizon));
  }
  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 15.0;
    d.env.lane = {0.0, 0.0, 0.004, 0.0};
    d.history = ConstantHistory({0.0, 0.0, 12.0, 0.0}, kHistory, dt);
    const double gx = 12.0 * end;
    d.env.goal = {gx, d.env.LaneOffset(gx)};
    out.push_back(Finish("curve_left", CornerKind::kCurvature, std::move(d),
                         -1, horizon));
  }
  {
    Demonstration d;
    d.env.dt = dt;
    d.env.speed_limit = 15.0;
    d.env.lane = {0.0, 0.0, -0.003, -2e-5};
    d.history = ConstantHistory({0.0, 0.0, 12.0, 0.0}, kHistory, dt);
    const double gx = 12.0 * end;
    d.env.goal = {gx, d.env.LaneOffset(gx)};
    out.push_back(Finish("curve_right", CornerKind::kCurvature, std::move(d),
                         -1, horizon));
  }
  return out;
}

CornerReport CornerSuite(const CostModel& model, const SamplerConfig& solver,
                         const CornerThresholds& thresholds,
                         const DynamicsVariant& dynamics,
                         const FeatureConfig& features,
                         const ControlLimits& limits, int workers) {
  const int horizon = model.normalizer().reference_horizon;
  const std::vector<CornerScene> scenes =
      CornerScenes(horizon, dynamics.dt);
  CornerReport report;
  report.scenes.resize(scenes.size());
  ParallelFor(static_cast<int>(scenes.size()), workers, [&](int i) {
    const CornerScene& cs = scenes[i];
    CornerResult& r = report.scenes[i];
    r.name = cs.name;
    r.kind = ToString(cs.kind);
    try {
      SamplerConfig config = solver;
      config.seed = DeriveSeed(solver.seed, "corner", {static_cast<uint64_t>(i)});
      config.record_iterates = true;
      const SceneEnergy energy(model, std::span(&cs.scene, 1), horizon,
                               dynamics.WithDt(cs.scene.env.dt), features,
                               limits);
      SolverResult s =
          SolveScene(energy, Eigen::VectorXd::Zero(energy.dim()), config)
              .front();
      r.trajectory = s.trajectory;
      r.control_trace = std::move(s.iterates);
      const State& x0 = cs.scene.history.initial_state();
      double accel = 0.0;
      for (const Control& u : s.controls.controls) accel += u.accel;
      r.mean_accel = accel / static_cast<double>(horizon);
      r.speed_change = s.trajectory.states.back().v - x0.v;
      r.min_lead_distance = std::numeric_limits<double>::infinity();
      r.max_lane_deviation = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const State& st = s.trajectory.states[t];
        r.max_lane_deviation = std::max(
            r.max_lane_deviation, std::abs(st.y - cs.scene.env.LaneOffset(st.x)));
        if (cs.lead >= 0) {
          const Point2& p = cs.scene.env.obstacles[cs.lead].positions[t];
          r.min_lead_distance =
              std::min(r.min_lead_distance, std::hypot(st.x - p.x, st.y - p.y));
        }
      }
      if (cs.lead < 0) r.min_lead_distance = 0.0;
      switch (cs.kind) {
        case CornerKind::kSuddenBrake:
          r.passed = r.mean_accel < 0.0 &&
                     r.min_lead_distance > thresholds.safety_gap;
          break;
        case CornerKind::kCutIn:
          r.passed = r.speed_change < 0.0;
          break;
        case CornerKind::kCurvature:
          r.passed = r.max_lane_deviation < thresholds.max_lane_deviation;
          break;
      }
    } catch (const Error& e) {
      r.solver_failed = true;
      r.passed = false;
      r.error = e.what();
    }
  });
  for (const CornerResult& r : report.scenes) report.passed += r.passed;
  return report;
}

Json ToJson(const CornerReport& report) {
  Json scenes = Json::array();
  for (const CornerResult& r : report.scenes) {
    Json trace = Json::array();
    for (const ControlSequence& seq : r.control_trace) {
      trace.push_back(ControlsJson(seq));
    }
    scenes.push_back({{"name", r.name},
                      {"kind", r.kind},
                      {"passed", r.passed},
                      {"solver_failed", r.solver_failed},
                      {"error", r.error},
                      {"mean_accel", r.mean_accel},
                      {"min_lead_distance", r.min_lead_distance},
                      {"speed_change", r.speed_change},
                      {"max_lane_deviation", r.max_lane_deviation},
                      {"trajectory", ToJson(r.trajectory)},
                      {"control_trace", trace}});
  }
  return {{"passed", report.passed},
          {"total", static_cast<int>(report.scenes.size())},
          {"scenes", scenes}};
}

CornerReport CornerReportFromJson(const Json& j) {
  CornerReport report;
  try {
    report.passed = j.at("passed").get<int>();
    for (const Json& s : j.at("scenes")) {
      CornerResult r;
      r.name = s.at("name").get<std::string>();
      r.kind = s.at("kind").get<std::string>();
      r.passed = s.at("passed").get<bool>();
      r.solver_failed = s.at("solver_failed").get<bool>();
      r.error = s.at("error").get<std::string>();
      r.mean_accel = s.at("mean_accel").get<double>();
      r.min_lead_distance = s.at("min_lead_distance").get<double>();
      r.speed_change = s.at("speed_change").get<double>();
      r.max_lane_deviation = s.at("max_lane_deviation").get<double>();
      r.trajectory = TrajectoryFromJson(s.at("trajectory"));
      for (const Json& seq : s.at("control_trace")) {
        r.control_trace.push_back(ControlsFromJson(seq));
      }
      report.scenes.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed corner report: ") + e.what());
  }
  return report;
}

void WriteControlTraceCsv(std::ostream& out, const CornerReport& report) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "scene,langevin_step,t,accel,steer\n";
  for (const CornerResult& r : report.scenes) {
    for (size_t step = 0; step < r.control_trace.size(); ++step) {
      const auto& u = r.control_trace[step].controls;
      for (size_t t = 0; t < u.size(); ++t) {
        out << r.name << ',' << step << ',' << t << ',' << u[t].accel << ','
            << u[t].steer << '\n';
      }
    }
  }
  out.precision(old);
}

}  // namespace ebioc
