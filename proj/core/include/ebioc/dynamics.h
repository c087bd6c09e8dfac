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

// Deterministic vehicle dynamics x_t = f(x_{t-1}, u_t), its Jacobians,
// trajectory unrolling and inverse-dynamics control inference.

#ifndef EBIOC_DYNAMICS_H_
#define EBIOC_DYNAMICS_H_

#include <span>
#include <string>

#include <Eigen/Core>

#include "ebioc/types.h"

namespace ebioc {

enum class DynamicsModel {
  // Five-equation bicycle model transcribed symbol for symbol, including the
  // x_t terms on the right-hand side of the speed and heading updates.
  kPaperLiteral,
  // Standard kinematic bicycle with explicit Euler integration:
  //   x' = x + v dt cos h,  y' = y + v dt sin h,
  //   v' = v + a dt,        h' = h + (v dt / L) tan(steer).
  kCorrectedBicycle,
};

struct DynamicsVariant {
  DynamicsModel model = DynamicsModel::kCorrectedBicycle;
  double wheelbase = 3.0;  // L (m)
  double dt = 0.1;         // s

  DynamicsVariant WithDt(double new_dt) const {
    DynamicsVariant copy = *this;
    copy.dt = new_dt;
    return copy;
  }
};

std::string ToString(DynamicsModel model);
DynamicsModel DynamicsModelFromString(const std::string& name);

using StateMatrix = Eigen::Matrix4d;
using InputMatrix = Eigen::Matrix<double, 4, 2>;

struct StepJacobian {
  StateMatrix A;  // d step / d state, rows/cols ordered (x, y, v, h)
  InputMatrix B;  // d step / d control, cols ordered (accel, steer)
};

// Throws DomainError when |steer| >= pi/2 or, for the literal model, when the
// sqrt / arcsin arguments leave their domain or v == 0.
State Step(const State& s, const Control& u, const DynamicsVariant& variant);
StepJacobian StepJacobians(const State& s, const Control& u,
                           const DynamicsVariant& variant);

// Unrolls u_1..u_T from x_0. Delta-mode sequences are prefix-summed from
// `anchor` first; the returned trajectory holds the same sequence (same mode)
// it was given. Step errors are rethrown with the timestep index.
Trajectory Unroll(const State& x0, const ControlSequence& seq,
                  const DynamicsVariant& variant, const Control& anchor = {});

// Pointwise dynamic-consistency report of a demonstration.
struct ValidationReport {
  bool consistent = false;
  double max_error = 0.0;  // max abs coordinate error over all states
  int worst_step = -1;
  std::string message;
};

// Re-unrolls the expert controls from x_0 (dt taken from the environment) and
// compares states coordinate-wise against `tol`. Length mismatches throw
// StructuralError; dynamic inconsistency is reported, not thrown.
ValidationReport ValidateDemonstration(const Demonstration& demo, double tol,
                                       const DynamicsVariant& variant = {});

struct InferOptions {
  int iters = 500;
  double learning_rate = 0.05;
  // per-iteration cap on each delta-control component, in scaled units
  double clamp = 0.1;
  // delta-control units: accel (m/s^2), steer (rad)
  Eigen::Vector2d control_scale = Eigen::Vector2d(1.0, 0.05);
  // start from the exact finite-difference inversion of the corrected model
  bool finite_difference_init = true;
  ControlLimits limits;
};

struct InferResult {
  ControlSequence controls;  // absolute mode, u_1..u_N
  Trajectory fitted;         // re-unrolled states
  double rmse = 0.0;         // positional fit RMSE (m)
  int iterations = 0;
};

// Fits controls so that unrolling from x0 reproduces positions[1..N]
// (positions[0] must be x0's position). Minimizes the summed squared position
// error by Adam-preconditioned gradient descent on delta controls, with the
// gradient back-propagated through the unrolled dynamics. Throws
// DivergenceError on a non-finite loss and StructuralError on < 2 positions.
InferResult InferControls(std::span<const Point2> positions, const State& x0,
                          const Control& anchor, const DynamicsVariant& variant,
                          const InferOptions& options = {});

}  // namespace ebioc

#endif  // EBIOC_DYNAMICS_H_
