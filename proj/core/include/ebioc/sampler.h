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

// Trajectory solvers sharing one configuration and result shape.
//
//   langevin  z <- z + clip(-(delta^2 / 2) dE/dz + noise_scale * delta * xi)
//   gd        z <- z + clip(-eta dE/dz), eta = step_size, halved until the
//             energy does not increase (unless strict)
//   ilqr      see ilqr.h
//
// z are normalized delta controls (objective.h); clip bounds every component
// of the increment by `clamp`.

#ifndef EBIOC_SAMPLER_H_
#define EBIOC_SAMPLER_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ebioc/ilqr.h"
#include "ebioc/objective.h"
#include "ebioc/random.h"

namespace ebioc {

enum class SolverKind { kLangevin, kGd, kIlqr };

std::string ToString(SolverKind kind);
SolverKind SolverKindFromString(const std::string& name);

struct SamplerConfig {
  SolverKind kind = SolverKind::kLangevin;
  int steps = 64;           // l
  double step_size = 0.1;   // delta (langevin) or eta (gd)
  double clamp = 0.1;       // per-component increment bound
  double noise_scale = 1.0; // multiplies delta * xi; ignored by gd
  bool backtracking = true; // gd only; false is the fixed-step variant
  int max_halvings = 30;
  uint64_t seed = 0;
  bool record_iterates = false;
  IlqrConfig ilqr;
};

// Throws ConfigError unless steps >= 1, step_size > 0 and clamp > 0.
void Validate(const SamplerConfig& config);

// Result over a generic energy.
struct ChainResult {
  Eigen::VectorXd z;
  std::vector<double> energy;  // initial energy followed by one per step
  int accepted = 0;
  double max_increment = 0.0;  // largest |component| of any applied increment
  std::vector<Eigen::VectorXd> iterates;  // when recording, including z_0
};

// Langevin chain. `noise` holds one stream per equally sized block of z
// (one per agent); a single stream drives the whole vector.
ChainResult RunLangevin(const EnergyFunction& energy, Eigen::VectorXd z0,
                        const SamplerConfig& config,
                        std::vector<NormalSource>& noise);
ChainResult RunGradientDescent(const EnergyFunction& energy, Eigen::VectorXd z0,
                               const SamplerConfig& config);

struct SolverResult {
  ControlSequence controls;  // absolute, saturated
  Trajectory trajectory;
  std::vector<double> energy;
  int accepted = 0;
  double max_increment = 0.0;
  double wall_time = 0.0;  // seconds; diagnostics only
  std::vector<ControlSequence> iterates;
};

// Runs the configured solver on a scene from z0; one result per agent (the
// energy trace is the joint one). Langevin noise of agent k is drawn from
// the stream DeriveSeed(config.seed, "agent", {k}).
std::vector<SolverResult> SolveScene(const SceneEnergy& energy,
                                     const Eigen::VectorXd& z0,
                                     const SamplerConfig& config);
// Same with explicit per-agent noise seeds.
std::vector<SolverResult> SolveScene(const SceneEnergy& energy,
                                     const Eigen::VectorXd& z0,
                                     const SamplerConfig& config,
                                     const std::vector<uint64_t>& agent_seeds);

// Single-agent conveniences; `init` may be in either mode.
SolverResult LangevinSample(const CostModel& model, const ControlSequence& init,
                            const State& x0, const Environment& env,
                            const History& history, const SamplerConfig& config,
                            const DynamicsVariant& dynamics = {},
                            const FeatureConfig& features = {},
                            const ControlLimits& limits = {});
SolverResult GdOptimize(const CostModel& model, const ControlSequence& init,
                        const State& x0, const Environment& env,
                        const History& history, const SamplerConfig& config,
                        const DynamicsVariant& dynamics = {},
                        const FeatureConfig& features = {},
                        const ControlLimits& limits = {});
SolverResult IlqrSolve(const CostModel& model, const ControlSequence& init,
                       const State& x0, const Environment& env,
                       const History& history, const SamplerConfig& config,
                       const DynamicsVariant& dynamics = {},
                       const FeatureConfig& features = {},
                       const ControlLimits& limits = {});

// Zero controls in delta space: the anchor control held constant.
ControlSequence HoldControls(const History& history, int horizon);

// CSV "step,energy" rows.
void WriteEnergyCsv(std::ostream& out, const std::vector<double>& energy);

}  // namespace ebioc

#endif  // EBIOC_SAMPLER_H_
