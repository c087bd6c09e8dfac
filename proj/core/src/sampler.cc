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

#include "ebioc/sampler.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "ebioc/error.h"

namespace ebioc {
namespace {

void CheckFinite(const Eigen::VectorXd& g, double e, int step) {
  if (!std::isfinite(e) || !g.allFinite()) {
    throw DivergenceError("non-finite energy or gradient at solver step " +
                          std::to_string(step));
  }
}

// Clips in place; returns the largest absolute component afterwards.
double Clip(Eigen::VectorXd& inc, double clamp) {
  inc = inc.cwiseMax(-clamp).cwiseMin(clamp);
  return inc.size() ? inc.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

std::string ToString(SolverKind kind) {
  switch (kind) {
    case SolverKind::kLangevin: return "langevin";
    case SolverKind::kGd: return "gd";
    case SolverKind::kIlqr: return "ilqr";
  }
  return "langevin";
}

SolverKind SolverKindFromString(const std::string& name) {
  if (name == "langevin") return SolverKind::kLangevin;
  if (name == "gd") return SolverKind::kGd;
  if (name == "ilqr") return SolverKind::kIlqr;
  throw ConfigError("unknown solver '" + name + "'");
}

void Validate(const SamplerConfig& config) {
  if (config.steps < 1) throw ConfigError("sampler steps must be >= 1");
  if (!(config.step_size > 0.0)) throw ConfigError("sampler step_size must be > 0");
  if (!(config.clamp > 0.0)) throw ConfigError("sampler clamp must be > 0");
  if (config.max_halvings < 0) throw ConfigError("max_halvings must be >= 0");
}

ChainResult RunLangevin(const EnergyFunction& energy, Eigen::VectorXd z0,
                        const SamplerConfig& config,
                        std::vector<NormalSource>& noise) {
  Validate(config);
  const int n = energy.dim();
  if (z0.size() != n) throw StructuralError("chain start has the wrong size");
  if (noise.empty() || n % static_cast<int>(noise.size()) != 0) {
    throw StructuralError("noise streams must evenly divide the variables");
  }
  const int block = n / static_cast<int>(noise.size());
  const double delta = config.step_size;
  ChainResult r;
  r.z = std::move(z0);
  Eigen::VectorXd grad;
  double e = energy.Evaluate(r.z, &grad);
  CheckFinite(grad, e, 0);
  r.energy.push_back(e);
  if (config.record_iterates) r.iterates.push_back(r.z);
  Eigen::VectorXd inc(n);
  for (int s = 0; s < config.steps; ++s) {
    for (size_t b = 0; b < noise.size(); ++b) {
      for (int i = 0; i < block; ++i) {
        const int j = static_cast<int>(b) * block + i;
        inc[j] = -0.5 * delta * delta * grad[j] +
                 config.noise_scale * delta * noise[b].Next();
      }
    }
    r.max_increment = std::max(r.max_increment, Clip(inc, config.clamp));
    r.z += inc;
    e = energy.Evaluate(r.z, &grad);
    CheckFinite(grad, e, s + 1);
    r.energy.push_back(e);
    ++r.accepted;
    if (config.record_iterates) r.iterates.push_back(r.z);
  }
  return r;
}

ChainResult RunGradientDescent(const EnergyFunction& energy, Eigen::VectorXd z0,
                               const SamplerConfig& config) {
  Validate(config);
  if (z0.size() != energy.dim()) {
    throw StructuralError("chain start has the wrong size");
  }
  ChainResult r;
  r.z = std::move(z0);
  Eigen::VectorXd grad;
  double e = energy.Evaluate(r.z, &grad);
  CheckFinite(grad, e, 0);
  r.energy.push_back(e);
  if (config.record_iterates) r.iterates.push_back(r.z);
  Eigen::VectorXd trial_grad;
  for (int s = 0; s < config.steps; ++s) {
    double eta = config.step_size;
    bool moved = false;
    for (int h = 0; h <= (config.backtracking ? config.max_halvings : 0); ++h) {
      Eigen::VectorXd inc = -eta * grad;
      const double m = Clip(inc, config.clamp);
      const Eigen::VectorXd trial = r.z + inc;
      double trial_e;
      try {
        trial_e = energy.Evaluate(trial, &trial_grad);
      } catch (const DomainError&) {
        if (!config.backtracking) throw;
        eta *= 0.5;
        continue;
      }
      if (config.backtracking &&
          (!std::isfinite(trial_e) || trial_e > e)) {
        eta *= 0.5;
        continue;
      }
      CheckFinite(trial_grad, trial_e, s + 1);
      r.z = trial;
      e = trial_e;
      grad = trial_grad;
      r.max_increment = std::max(r.max_increment, m);
      moved = true;
      break;
    }
    if (moved) ++r.accepted;
    r.energy.push_back(e);
    if (config.record_iterates) r.iterates.push_back(r.z);
  }
  return r;
}

std::vector<SolverResult> SolveScene(const SceneEnergy& energy,
                                     const Eigen::VectorXd& z0,
                                     const SamplerConfig& config) {
  std::vector<uint64_t> seeds;
  for (int k = 0; k < energy.num_agents(); ++k) {
    seeds.push_back(DeriveSeed(config.seed, "agent", {static_cast<uint64_t>(k)}));
  }
  return SolveScene(energy, z0, config, seeds);
}

std::vector<SolverResult> SolveScene(const SceneEnergy& energy,
                                     const Eigen::VectorXd& z0,
                                     const SamplerConfig& config,
                                     const std::vector<uint64_t>& agent_seeds) {
  if (static_cast<int>(agent_seeds.size()) != energy.num_agents()) {
    throw StructuralError("one noise seed per agent expected");
  }
  const auto start = std::chrono::steady_clock::now();
  ChainResult chain;
  switch (config.kind) {
    case SolverKind::kLangevin: {
      std::vector<NormalSource> noise;
      for (uint64_t seed : agent_seeds) noise.emplace_back(seed);
      chain = RunLangevin(energy, z0, config, noise);
      break;
    }
    case SolverKind::kGd:
      chain = RunGradientDescent(energy, z0, config);
      break;
    case SolverKind::kIlqr: {
      const DrivingProblem problem(energy);
      const IlqrResult r =
          SolveIlqr(problem, DrivingProblem::Split(z0), config.ilqr);
      chain.z = DrivingProblem::Flatten(r.us);
      chain.energy = r.cost_trace;
      chain.accepted = static_cast<int>(r.cost_trace.size()) - 1;
      if (config.record_iterates) chain.iterates = {z0, chain.z};
      break;
    }
  }
  const SceneRollout rollout = energy.Rollout(chain.z);
  const double wall = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  std::vector<SolverResult> out(energy.num_agents());
  for (int k = 0; k < energy.num_agents(); ++k) {
    SolverResult& r = out[k];
    r.controls = rollout.controls[k];
    r.trajectory = rollout.trajectories[k];
    r.energy = chain.energy;
    r.accepted = chain.accepted;
    r.max_increment = chain.max_increment;
    r.wall_time = wall;
  }
  if (config.record_iterates) {
    for (const Eigen::VectorXd& z : chain.iterates) {
      const SceneRollout it = energy.Rollout(z);
      for (int k = 0; k < energy.num_agents(); ++k) {
        out[k].iterates.push_back(it.controls[k]);
      }
    }
  }
  return out;
}

namespace {

SolverResult SolveSingle(SolverKind kind, const CostModel& model,
                         const ControlSequence& init, const State& x0,
                         const Environment& env, const History& history,
                         SamplerConfig config, const DynamicsVariant& dynamics,
                         const FeatureConfig& features,
                         const ControlLimits& limits) {
  config.kind = kind;
  Demonstration agent;
  agent.history = history;
  agent.history.frames.back().state = x0;
  agent.env = env;
  const std::vector<Demonstration> agents = {agent};
  const SceneEnergy energy(model, agents, init.size(), dynamics, features,
                           limits);
  const Eigen::VectorXd z0 = energy.ToZ({init});
  return SolveScene(energy, z0, config).front();
}

}  // namespace

SolverResult LangevinSample(const CostModel& model, const ControlSequence& init,
                            const State& x0, const Environment& env,
                            const History& history, const SamplerConfig& config,
                            const DynamicsVariant& dynamics,
                            const FeatureConfig& features,
                            const ControlLimits& limits) {
  return SolveSingle(SolverKind::kLangevin, model, init, x0, env, history,
                     config, dynamics, features, limits);
}

SolverResult GdOptimize(const CostModel& model, const ControlSequence& init,
                        const State& x0, const Environment& env,
                        const History& history, const SamplerConfig& config,
                        const DynamicsVariant& dynamics,
                        const FeatureConfig& features,
                        const ControlLimits& limits) {
  return SolveSingle(SolverKind::kGd, model, init, x0, env, history, config,
                     dynamics, features, limits);
}

SolverResult IlqrSolve(const CostModel& model, const ControlSequence& init,
                       const State& x0, const Environment& env,
                       const History& history, const SamplerConfig& config,
                       const DynamicsVariant& dynamics,
                       const FeatureConfig& features,
                       const ControlLimits& limits) {
  return SolveSingle(SolverKind::kIlqr, model, init, x0, env, history, config,
                     dynamics, features, limits);
}

ControlSequence HoldControls(const History& history, int horizon) {
  ControlSequence seq;
  seq.controls.assign(horizon, history.last_control());
  return seq;
}

void WriteEnergyCsv(std::ostream& out, const std::vector<double>& energy) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "step,energy\n";
  for (size_t s = 0; s < energy.size(); ++s) out << s << ',' << energy[s] << '\n';
  out.precision(old);
}

}  // namespace ebioc
