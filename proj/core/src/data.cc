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

#include "ebioc/data.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "ebioc/logging.h"
#include "ebioc/objective.h"
#include "ebioc/parallel.h"
#include "ebioc/random.h"

namespace ebioc {
namespace {

// Uniform draw from the top 53 bits, identical on every platform.
double Uniform(std::mt19937_64& rng, const Range& r) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return r.lo + (r.hi - r.lo) * u;
}

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

void CheckRange(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ConfigError(std::string("range '") + name + "' is empty");
  }
}

History Warmup(const State& start, const Control& u, int k,
               const DynamicsVariant& dyn) {
  History h;
  State s = start;
  h.frames.push_back({s, u});
  for (int i = 0; i < k; ++i) {
    s = Step(s, u, dyn);
    h.frames.push_back({s, u});
  }
  return h;
}

struct AgentStart {
  History history;
  double speed = 0.0;
};

AgentStart DrawAgent(std::mt19937_64& rng, const ScenarioSpec& spec,
                     const Environment& env, double x_start) {
  const double v = Uniform(rng, spec.speed);
  const State s{x_start,
                env.LaneOffset(x_start) + Uniform(rng, spec.lateral_offset), v,
                env.LaneHeading(x_start) + Uniform(rng, spec.heading_offset)};
  const Control u{Uniform(rng, spec.warmup_accel),
                  Uniform(rng, spec.warmup_steer)};
  DynamicsVariant dyn;
  dyn.dt = spec.dt;
  return {Warmup(s, u, spec.history, dyn), v};
}

OtherVehicleTrack LaneTrack(const Environment& env, double x_start, int lane,
                            double lane_width, double speed, int horizon,
                            double dt) {
  OtherVehicleTrack track;
  for (int t = 0; t < horizon; ++t) {
    const double x = x_start + speed * (t + 1) * dt;
    track.positions.push_back({x, env.LaneOffset(x) + lane * lane_width});
  }
  return track;
}

// Draws the obstacles around one agent; false when a draw violates the
// clearance against any of `egos`.
bool DrawObstacles(std::mt19937_64& rng, const ScenarioSpec& spec,
                   const Environment& env, const State& x0,
                   const std::vector<State>& egos,
                   std::vector<OtherVehicleTrack>* out) {
  const int n = UniformInt(rng, spec.min_obstacles, spec.max_obstacles);
  for (int j = 0; j < n; ++j) {
    const double xs = x0.x + Uniform(rng, spec.obstacle_gap);
    const int lane = UniformInt(rng, -1, 1);
    const double v = Uniform(rng, spec.obstacle_speed);
    const double ys = env.LaneOffset(xs) + lane * spec.lane_width;
    for (const State& e : egos) {
      if (std::hypot(xs - e.x, ys - e.y) < spec.min_clearance) return false;
    }
    out->push_back(
        LaneTrack(env, xs, lane, spec.lane_width, v, spec.horizon, spec.dt));
  }
  return true;
}

std::vector<Scenario> DrawScene(const ScenarioSpec& spec, int agents,
                                uint64_t seed) {
  std::mt19937_64 rng(seed);
  Environment env;
  env.dt = spec.dt;
  env.lane = {Uniform(rng, spec.lane_c0), Uniform(rng, spec.lane_c1),
              Uniform(rng, spec.lane_c2), Uniform(rng, spec.lane_c3)};
  env.speed_limit = Uniform(rng, spec.speed_limit);

  std::vector<AgentStart> starts;
  std::vector<State> egos;
  for (int k = 0; k < agents; ++k) {
    starts.push_back(DrawAgent(rng, spec, env, k * spec.agent_spacing));
    egos.push_back(starts.back().history.initial_state());
  }
  for (int attempt = 0;; ++attempt) {
    std::vector<OtherVehicleTrack> obstacles;
    bool ok = true;
    for (int k = 0; k < agents && ok; ++k) {
      ok = DrawObstacles(rng, spec, env, egos[k], egos, &obstacles);
    }
    if (ok) {
      env.obstacles = std::move(obstacles);
      break;
    }
    if (attempt + 1 >= spec.max_retries) {
      throw ConfigError("no obstacle placement respects the clearance after " +
                        std::to_string(spec.max_retries) + " attempts");
    }
  }

  std::vector<Scenario> out;
  for (int k = 0; k < agents; ++k) {
    Scenario s{starts[k].history, env};
    const State& x0 = egos[k];
    const double gx = x0.x + Uniform(rng, spec.goal_distance) * starts[k].speed *
                                 spec.horizon * spec.dt;
    s.env.goal = {gx, env.LaneOffset(gx)};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void Validate(const ScenarioSpec& s) {
  if (s.count < 1) throw ConfigError("count must be >= 1");
  if (s.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(s.dt > 0.0)) throw ConfigError("dt must be positive");
  if (s.history < 0) throw ConfigError("history must be >= 0");
  if (s.min_obstacles < 0 || s.max_obstacles < s.min_obstacles) {
    throw ConfigError("obstacle count range is empty");
  }
  if (s.agents < 1) throw ConfigError("agents must be >= 1");
  if (s.max_retries < 1) throw ConfigError("max_retries must be >= 1");
  CheckRange(s.lane_c0, "lane_c0");
  CheckRange(s.lane_c1, "lane_c1");
  CheckRange(s.lane_c2, "lane_c2");
  CheckRange(s.lane_c3, "lane_c3");
  CheckRange(s.speed, "speed");
  CheckRange(s.speed_limit, "speed_limit");
  CheckRange(s.lateral_offset, "lateral_offset");
  CheckRange(s.heading_offset, "heading_offset");
  CheckRange(s.warmup_accel, "warmup_accel");
  CheckRange(s.warmup_steer, "warmup_steer");
  CheckRange(s.goal_distance, "goal_distance");
  CheckRange(s.obstacle_gap, "obstacle_gap");
  CheckRange(s.obstacle_speed, "obstacle_speed");
  if (s.speed.lo <= 0.0) throw ConfigError("speeds must be positive");
}

std::vector<Scenario> GenScenarios(const ScenarioSpec& spec, uint64_t seed) {
  Validate(spec);
  std::vector<Scenario> out;
  for (int i = 0; i < spec.count; ++i) {
    out.push_back(
        DrawScene(spec, 1, DeriveSeed(seed, "scenario",
                                      {static_cast<uint64_t>(i)}))
            .front());
  }
  return out;
}

std::vector<std::vector<Scenario>> GenJointScenarios(const ScenarioSpec& spec,
                                                     uint64_t seed) {
  Validate(spec);
  std::vector<std::vector<Scenario>> out;
  for (int i = 0; i < spec.count; ++i) {
    out.push_back(DrawScene(spec, spec.agents,
                            DeriveSeed(seed, "joint_scenario",
                                       {static_cast<uint64_t>(i)})));
  }
  return out;
}

std::vector<std::string> ThetaStarPresets() {
  return {"lane_keeper", "goal_seeker", "defensive"};
}

FeatureVector ThetaStarPreset(const std::string& name) {
  // goal lon, goal lat, lane centre, speed, heading, accel^2, steer^2,
  // d accel^2, d steer^2, obstacle distance
  FeatureVector theta;
  if (name == "lane_keeper") {
    theta << 0.5, 1.0, 1.0, 0.5, 5.0, 0.2, 20.0, 2.0, 200.0, 0.0;
  } else if (name == "goal_seeker") {
    theta << 3.0, 3.0, 0.5, 0.3, 5.0, 0.2, 20.0, 2.0, 200.0, 0.0;
  } else if (name == "defensive") {
    theta << 0.5, 1.0, 1.0, 0.5, 5.0, 0.2, 20.0, 2.0, 200.0, -0.5;
  } else {
    throw ConfigError("unknown ground-truth preset '" + name + "'");
  }
  return theta;
}

std::unique_ptr<CostModel> GroundTruthCost(const FeatureVector& theta,
                                           int horizon,
                                           const Eigen::Vector2d& control_std) {
  if (!theta.allFinite()) throw ConfigError("ground-truth weights must be finite");
  return std::make_unique<LinearCost>(
      FeatureNormalizer::Identity(horizon, control_std), theta);
}

namespace {

SolverResult Jitter(const SceneEnergy& energy, const SolverResult& solved,
                    const ExpertConfig& config, uint64_t seed) {
  SamplerConfig c = config.solver;
  c.kind = SolverKind::kLangevin;
  c.steps = config.jitter_steps;
  c.step_size = config.jitter_step_size;
  c.seed = seed;
  c.record_iterates = false;
  return SolveScene(energy, energy.ToZ({solved.controls}), c).front();
}

// Keeps the demonstration when it re-unrolls exactly.
bool Consistent(const Demonstration& d, const DynamicsVariant& dyn) {
  const ValidationReport r = ValidateDemonstration(d, 1e-9, dyn);
  if (!r.consistent) LogWarning("expert failed validation: " + r.message);
  return r.consistent;
}

}  // namespace

std::vector<Demonstration> GenExpertDemos(const std::vector<Scenario>& scenarios,
                                          const CostModel& theta_star,
                                          const ExpertConfig& config,
                                          uint64_t seed) {
  Validate(config.solver);
  const int horizon = theta_star.normalizer().reference_horizon;
  std::vector<Demonstration> solved(scenarios.size());
  std::vector<char> ok(scenarios.size(), 0);
  ParallelFor(static_cast<int>(scenarios.size()), config.workers, [&](int i) {
    Demonstration d;
    d.history = scenarios[i].history;
    d.env = scenarios[i].env;
    try {
      const DynamicsVariant dyn = config.dynamics.WithDt(d.env.dt);
      const SceneEnergy energy(theta_star, std::span(&d, 1), horizon, dyn,
                               config.features, config.limits);
      SamplerConfig c = config.solver;
      c.seed = DeriveSeed(seed, "expert", {static_cast<uint64_t>(i)});
      c.record_iterates = false;
      SolverResult r =
          SolveScene(energy, Eigen::VectorXd::Zero(energy.dim()), c).front();
      if (config.jitter_steps > 0) {
        r = Jitter(energy, r, config,
                   DeriveSeed(seed, "jitter", {static_cast<uint64_t>(i)}));
      }
      d.expert = r.trajectory;
      if (Consistent(d, dyn)) {
        solved[i] = std::move(d);
        ok[i] = 1;
      }
    } catch (const Error& e) {
      LogWarning("dropping scenario " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<Demonstration> out;
  for (size_t i = 0; i < solved.size(); ++i) {
    if (ok[i]) out.push_back(std::move(solved[i]));
  }
  return out;
}

std::vector<JointScene> GenExpertScenes(
    const std::vector<std::vector<Scenario>>& scenes,
    const CostModel& theta_star, const ExpertConfig& config, uint64_t seed) {
  Validate(config.solver);
  const int horizon = theta_star.normalizer().reference_horizon;
  std::vector<JointScene> solved(scenes.size());
  std::vector<char> ok(scenes.size(), 0);
  ParallelFor(static_cast<int>(scenes.size()), config.workers, [&](int i) {
    JointScene js;
    for (const Scenario& s : scenes[i]) {
      Demonstration d;
      d.history = s.history;
      d.env = s.env;
      js.agents.push_back(std::move(d));
    }
    const int n = js.size();
    try {
      const DynamicsVariant dyn = config.dynamics.WithDt(js.agents[0].env.dt);
      // placeholder experts: the anchor control held
      for (Demonstration& d : js.agents) {
        d.expert = Unroll(d.history.initial_state(),
                          HoldControls(d.history, horizon), dyn);
      }
      const uint64_t scene_seed =
          DeriveSeed(seed, "expert", {static_cast<uint64_t>(i)});
      if (config.solver.kind == SolverKind::kIlqr) {
        // one best-response sweep: agent k against the others' current plans
        for (int k = 0; k < n; ++k) {
          Demonstration view = js.agents[k];
          for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            OtherVehicleTrack track;
            for (const State& s : js.agents[j].expert.states) {
              track.positions.push_back({s.x, s.y});
            }
            view.env.obstacles.push_back(std::move(track));
          }
          const SceneEnergy energy(theta_star, std::span(&view, 1), horizon,
                                   dyn, config.features, config.limits);
          const SolverResult r =
              SolveScene(energy, Eigen::VectorXd::Zero(energy.dim()),
                         config.solver)
                  .front();
          js.agents[k].expert = r.trajectory;
        }
      } else {
        const SceneEnergy energy(theta_star, js.agents, horizon, dyn,
                                 config.features, config.limits);
        SamplerConfig c = config.solver;
        c.seed = scene_seed;
        const auto r = SolveScene(energy, Eigen::VectorXd::Zero(energy.dim()), c);
        for (int k = 0; k < n; ++k) js.agents[k].expert = r[k].trajectory;
      }
      if (config.jitter_steps > 0) {
        const SceneEnergy energy(theta_star, js.agents, horizon, dyn,
                                 config.features, config.limits);
        std::vector<ControlSequence> controls;
        for (const Demonstration& d : js.agents) {
          controls.push_back(d.expert.controls);
        }
        SamplerConfig c = config.solver;
        c.kind = SolverKind::kLangevin;
        c.steps = config.jitter_steps;
        c.step_size = config.jitter_step_size;
        c.seed = DeriveSeed(seed, "jitter", {static_cast<uint64_t>(i)});
        const auto r = SolveScene(energy, energy.ToZ(controls), c);
        for (int k = 0; k < n; ++k) js.agents[k].expert = r[k].trajectory;
      }
      bool all = true;
      for (const Demonstration& d : js.agents) all = all && Consistent(d, dyn);
      if (all) {
        solved[i] = std::move(js);
        ok[i] = 1;
      }
    } catch (const Error& e) {
      LogWarning("dropping scene " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<JointScene> out;
  for (size_t i = 0; i < solved.size(); ++i) {
    if (ok[i]) out.push_back(std::move(solved[i]));
  }
  return out;
}

std::vector<size_t> SplitPermutation(size_t n, uint64_t seed) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(DeriveSeed(seed, "split"));
  // Fisher-Yates with the portable integer draw
  for (size_t i = n; i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

PositionTrack TrackOf(const Demonstration& demo) {
  PositionTrack track;
  for (const HistoryFrame& f : demo.history.frames) {
    track.positions.push_back({f.state.x, f.state.y});
  }
  for (const State& s : demo.expert.states) track.positions.push_back({s.x, s.y});
  track.env = demo.env;
  track.history = static_cast<int>(demo.history.frames.size()) - 1;
  track.has_goal = true;
  return track;
}

namespace {

// Position and velocity at tau = 0 of a least-squares quadratic through the
// first points.
void InitialFit(const std::vector<Point2>& p, int points, double dt,
                Point2* pos, Eigen::Vector2d* vel) {
  const int m = std::min<int>(points, static_cast<int>(p.size()));
  const int degree = m >= 3 ? 2 : 1;
  Eigen::MatrixXd a(m, degree + 1);
  Eigen::MatrixXd b(m, 2);
  for (int j = 0; j < m; ++j) {
    const double tau = j * dt;
    for (int d = 0; d <= degree; ++d) a(j, d) = std::pow(tau, d);
    b(j, 0) = p[j].x;
    b(j, 1) = p[j].y;
  }
  const Eigen::MatrixXd c = a.colPivHouseholderQr().solve(b);
  *pos = {c(0, 0), c(0, 1)};
  *vel = Eigen::Vector2d(c(1, 0), c(1, 1));
}

}  // namespace

IngestReport IngestTracks(const std::vector<PositionTrack>& tracks,
                          const IngestOptions& options) {
  IngestReport report;
  for (size_t i = 0; i < tracks.size(); ++i) {
    const PositionTrack& tr = tracks[i];
    const int n = static_cast<int>(tr.positions.size());
    const int k = tr.history;
    if (k < 0 || n < k + 2) {
      report.rejected.push_back({static_cast<int>(i), 0.0,
                                 "track has too few positions"});
      continue;
    }
    try {
      const DynamicsVariant dyn = options.dynamics.WithDt(tr.env.dt);
      Point2 p0;
      Eigen::Vector2d v0;
      InitialFit(tr.positions, options.initial_fit_points, tr.env.dt, &p0, &v0);
      const State x0{p0.x, p0.y, v0.norm(), std::atan2(v0.y(), v0.x())};
      std::vector<Point2> positions = tr.positions;
      positions[0] = p0;
      const InferResult fit =
          InferControls(positions, x0, {0.0, 0.0}, dyn, options.infer);
      if (!(fit.rmse <= options.max_rmse)) {
        report.rejected.push_back({static_cast<int>(i), fit.rmse,
                                   "fit RMSE above threshold"});
        continue;
      }
      Demonstration d;
      d.env = tr.env;
      const auto& u = fit.controls.controls;
      const auto& s = fit.fitted.states;
      d.history.frames.push_back({x0, u[0]});
      for (int j = 0; j < k; ++j) d.history.frames.push_back({s[j], u[j]});
      for (int j = k; j < n - 1; ++j) {
        d.expert.states.push_back(s[j]);
        d.expert.controls.controls.push_back(u[j]);
      }
      if (!tr.has_goal) d.env.goal = {s.back().x, s.back().y};
      report.dataset.push_back(std::move(d));
      report.rmse.push_back(fit.rmse);
    } catch (const Error& e) {
      report.rejected.push_back({static_cast<int>(i), 0.0, e.what()});
    }
  }
  return report;
}

Json ToJson(const PositionTrack& track) {
  Json positions = Json::array();
  for (const Point2& p : track.positions) positions.push_back({p.x, p.y});
  Json env = ToJson(track.env);
  if (!track.has_goal) env.erase("goal");
  return {{"positions", positions}, {"env", env}, {"history", track.history}};
}

PositionTrack PositionTrackFromJson(const Json& j) {
  PositionTrack track;
  try {
    for (const Json& p : j.at("positions")) {
      track.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    Json env = j.at("env");
    track.has_goal = env.contains("goal");
    if (!track.has_goal) env["goal"] = {0.0, 0.0};
    if (!env.contains("obstacles")) env["obstacles"] = Json::array();
    track.env = EnvironmentFromJson(env);
    if (j.contains("history")) track.history = j.at("history").get<int>();
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed track: ") + e.what());
  }
  return track;
}

std::vector<PositionTrack> ReadTracks(const std::string& path) {
  std::vector<PositionTrack> out;
  for (const Json& j : ReadJsonLines(path)) {
    out.push_back(PositionTrackFromJson(j));
  }
  return out;
}

}  // namespace ebioc
