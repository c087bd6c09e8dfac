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

#include "ebioc/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ebioc/adam.h"
#include "ebioc/error.h"

namespace ebioc {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// constants of the literal model's r_t and heading expressions
constexpr double kLiteralOffset = 3.0;
constexpr double kLiteralRadiusGain = 3.043;
constexpr double kGravity = 9.8;

void CheckSteer(const Control& u) {
  if (!(std::abs(u.steer) < kHalfPi)) {
    throw DomainError("steering angle " + std::to_string(u.steer) +
                      " outside (-pi/2, pi/2): tan(steer) undefined");
  }
}

// Shared sub-expressions of the literal model.
struct LiteralTerms {
  double sin_s, cos_s;
  double q;       // h dt sin(steer)
  double root;    // sqrt(9 - q^2)
  double r;       // 3 + v dt cos(steer) - root
  double w;       // arcsin argument
};

LiteralTerms LiteralExpressions(const State& s, const Control& u, double dt) {
  LiteralTerms e;
  e.sin_s = std::sin(u.steer);
  e.cos_s = std::cos(u.steer);
  e.q = s.h * dt * e.sin_s;
  const double radicand = kLiteralOffset * kLiteralOffset - e.q * e.q;
  if (radicand < 0.0) {
    throw DomainError("sqrt term 9 - (h dt sin(steer))^2 is negative (" +
                      std::to_string(radicand) + ")");
  }
  e.root = std::sqrt(radicand);
  e.r = kLiteralOffset + s.v * dt * e.cos_s - e.root;
  if (s.v == 0.0) {
    throw DomainError("arcsin term divides by the radius 3.043 v^2 / 9.8 = 0");
  }
  const double radius = kLiteralRadiusGain * s.v * s.v / kGravity;
  e.w = e.sin_s * s.v * dt / radius;
  if (!(std::abs(e.w) <= 1.0)) {
    throw DomainError("arcsin argument sin(steer) v dt / (3.043 v^2 / 9.8) = " +
                      std::to_string(e.w) + " outside [-1, 1]");
  }
  return e;
}

}  // namespace

std::string ToString(DynamicsModel model) {
  return model == DynamicsModel::kPaperLiteral ? "paper_literal"
                                               : "corrected_bicycle";
}

DynamicsModel DynamicsModelFromString(const std::string& name) {
  if (name == "paper_literal") return DynamicsModel::kPaperLiteral;
  if (name == "corrected_bicycle") return DynamicsModel::kCorrectedBicycle;
  throw ConfigError("unknown dynamics variant '" + name +
                    "' (expected paper_literal or corrected_bicycle)");
}

State Step(const State& s, const Control& u, const DynamicsVariant& variant) {
  CheckSteer(u);
  const double dt = variant.dt;
  if (variant.model == DynamicsModel::kCorrectedBicycle) {
    return {s.x + s.v * dt * std::cos(s.h), s.y + s.v * dt * std::sin(s.h),
            s.v + u.accel * dt,
            s.h + s.v * dt / variant.wheelbase * std::tan(u.steer)};
  }
  const LiteralTerms e = LiteralExpressions(s, u, dt);
  return {s.x + e.sin_s * e.r, s.y + e.cos_s * e.r, s.x + u.accel * dt,
          s.x + std::asin(e.w)};
}

StepJacobian StepJacobians(const State& s, const Control& u,
                           const DynamicsVariant& variant) {
  CheckSteer(u);
  const double dt = variant.dt;
  StepJacobian jac;
  jac.A.setZero();
  jac.B.setZero();
  if (variant.model == DynamicsModel::kCorrectedBicycle) {
    const double c = std::cos(s.h), sn = std::sin(s.h);
    const double tan_s = std::tan(u.steer);
    const double cos_s = std::cos(u.steer);
    const double L = variant.wheelbase;
    jac.A << 1, 0, dt * c, -s.v * dt * sn,  //
        0, 1, dt * sn, s.v * dt * c,        //
        0, 0, 1, 0,                         //
        0, 0, dt * tan_s / L, 1;
    jac.B(2, 0) = dt;
    jac.B(3, 1) = s.v * dt / (L * cos_s * cos_s);
    return jac;
  }
  const LiteralTerms e = LiteralExpressions(s, u, dt);
  // r = 3 + v dt cos(steer) - sqrt(9 - q^2), q = h dt sin(steer)
  const double dr_dv = dt * e.cos_s;
  const double dr_dh = e.root > 0.0 ? e.q * dt * e.sin_s / e.root : 0.0;
  const double dr_ds = -s.v * dt * e.sin_s +
                       (e.root > 0.0 ? e.q * s.h * dt * e.cos_s / e.root : 0.0);
  // x' = x + sin(steer) r
  jac.A(0, 0) = 1.0;
  jac.A(0, 2) = e.sin_s * dr_dv;
  jac.A(0, 3) = e.sin_s * dr_dh;
  jac.B(0, 1) = e.cos_s * e.r + e.sin_s * dr_ds;
  // y' = y + cos(steer) r
  jac.A(1, 1) = 1.0;
  jac.A(1, 2) = e.cos_s * dr_dv;
  jac.A(1, 3) = e.cos_s * dr_dh;
  jac.B(1, 1) = -e.sin_s * e.r + e.cos_s * dr_ds;
  // v' = x + a dt
  jac.A(2, 0) = 1.0;
  jac.B(2, 0) = dt;
  // h' = x + arcsin(w), w = 9.8 sin(steer) dt / (3.043 v)
  const double dasin = 1.0 / std::sqrt(std::max(1.0 - e.w * e.w, 1e-300));
  const double k = kGravity * dt / kLiteralRadiusGain;
  jac.A(3, 0) = 1.0;
  jac.A(3, 2) = dasin * (-k * e.sin_s / (s.v * s.v));
  jac.B(3, 1) = dasin * (k * e.cos_s / s.v);
  return jac;
}

Trajectory Unroll(const State& x0, const ControlSequence& seq,
                  const DynamicsVariant& variant, const Control& anchor) {
  const ControlSequence absolute = seq.mode == ControlMode::kDelta
                                       ? ToAbsolute(seq, anchor)
                                       : seq;
  Trajectory traj;
  traj.controls = seq;
  traj.states.reserve(absolute.controls.size());
  State s = x0;
  for (int t = 0; t < absolute.size(); ++t) {
    try {
      s = Step(s, absolute.controls[t], variant);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), t);
    }
    traj.states.push_back(s);
  }
  return traj;
}

ValidationReport ValidateDemonstration(const Demonstration& demo, double tol,
                                       const DynamicsVariant& variant) {
  const int horizon = demo.expert.size();
  if (demo.expert.controls.size() != horizon) {
    throw StructuralError("expert has " + std::to_string(horizon) +
                          " states but " +
                          std::to_string(demo.expert.controls.size()) +
                          " controls");
  }
  if (demo.history.frames.empty()) {
    throw StructuralError("demonstration has an empty history");
  }
  ValidationReport report;
  Trajectory replay;
  try {
    replay = Unroll(demo.history.initial_state(), demo.expert.controls,
                    variant.WithDt(demo.env.dt), demo.history.last_control());
  } catch (const DomainError& e) {
    report.consistent = false;
    report.message = std::string("re-unroll failed: ") + e.what();
    report.worst_step = e.step();
    report.max_error = std::numeric_limits<double>::infinity();
    return report;
  }
  for (int t = 0; t < horizon; ++t) {
    const State& a = replay.states[t];
    const State& b = demo.expert.states[t];
    const double err = std::max({std::abs(a.x - b.x), std::abs(a.y - b.y),
                                 std::abs(a.v - b.v), std::abs(a.h - b.h)});
    if (!(err <= report.max_error)) {
      report.max_error = err;
      report.worst_step = t;
    }
  }
  report.consistent = report.max_error <= tol;
  report.message = report.consistent
                       ? "consistent"
                       : "max state error " + std::to_string(report.max_error) +
                             " at step " + std::to_string(report.worst_step);
  return report;
}

namespace {

// Exact inversion of the corrected model from noiseless positions: position
// increments give (v, h) of the preceding state, differences of those give
// the controls. The last control does not affect any position and repeats
// the previous one.
std::vector<Control> FiniteDifferenceControls(std::span<const Point2> positions,
                                              const State& x0,
                                              const Control& anchor,
                                              const DynamicsVariant& variant) {
  const int n = static_cast<int>(positions.size()) - 1;
  const double dt = variant.dt;
  std::vector<Control> controls(n, anchor);
  double v_prev = x0.v, h_prev = x0.h;
  for (int t = 1; t < n; ++t) {
    const double dx = positions[t + 1].x - positions[t].x;
    const double dy = positions[t + 1].y - positions[t].y;
    const double v = std::hypot(dx, dy) / dt;
    double h = std::atan2(dy, dx);
    h = h_prev + std::remainder(h - h_prev, 2.0 * std::numbers::pi);
    Control u;
    u.accel = (v - v_prev) / dt;
    u.steer = std::abs(v_prev) > 1e-6
                  ? std::atan((h - h_prev) * variant.wheelbase / (v_prev * dt))
                  : controls[t - 1].steer;
    controls[t - 1] = u;
    v_prev = v;
    h_prev = h;
  }
  if (n >= 2) controls[n - 1] = controls[n - 2];
  return controls;
}

}  // namespace

InferResult InferControls(std::span<const Point2> positions, const State& x0,
                          const Control& anchor, const DynamicsVariant& variant,
                          const InferOptions& options) {
  if (positions.size() < 2) {
    throw StructuralError("InferControls needs at least 2 positions");
  }
  const int n = static_cast<int>(positions.size()) - 1;
  const Eigen::Vector2d scale = options.control_scale;
  const ControlLimits& limits = options.limits;

  // delta variables in scaled units, flattened (accel, steer) per step
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * n);
  if (options.finite_difference_init &&
      variant.model == DynamicsModel::kCorrectedBicycle) {
    std::vector<Control> init =
        FiniteDifferenceControls(positions, x0, anchor, variant);
    Control prev = anchor;
    for (int t = 0; t < n; ++t) {
      const Control u = limits.Saturate(init[t]);
      z[2 * t] = (u.accel - prev.accel) / scale[0];
      z[2 * t + 1] = (u.steer - prev.steer) / scale[1];
      prev = u;
    }
  }

  auto controls_of = [&](const Eigen::VectorXd& zz, std::vector<Control>* raw) {
    std::vector<Control> out(n);
    Control running = anchor;
    for (int t = 0; t < n; ++t) {
      running.accel += scale[0] * zz[2 * t];
      running.steer += scale[1] * zz[2 * t + 1];
      if (raw) (*raw)[t] = running;
      out[t] = limits.Saturate(running);
    }
    return out;
  };

  // loss and gradient w.r.t. z by reverse accumulation through the unroll
  auto evaluate = [&](const Eigen::VectorXd& zz, Eigen::VectorXd* grad) {
    std::vector<Control> raw(n);
    const std::vector<Control> u = controls_of(zz, &raw);
    std::vector<State> states(n + 1);
    states[0] = x0;
    for (int t = 0; t < n; ++t) states[t + 1] = Step(states[t], u[t], variant);
    double loss = 0.0;
    for (int t = 1; t <= n; ++t) {
      const double ex = states[t].x - positions[t].x;
      const double ey = states[t].y - positions[t].y;
      loss += ex * ex + ey * ey;
    }
    if (grad) {
      Eigen::Vector4d adjoint = Eigen::Vector4d::Zero();
      std::vector<Eigen::Vector2d> du(n);
      for (int t = n; t >= 1; --t) {
        adjoint[0] += 2.0 * (states[t].x - positions[t].x);
        adjoint[1] += 2.0 * (states[t].y - positions[t].y);
        const StepJacobian jac = StepJacobians(states[t - 1], u[t - 1], variant);
        du[t - 1] = jac.B.transpose() * adjoint;
        if (std::abs(raw[t - 1].accel) > limits.accel_max) du[t - 1][0] = 0.0;
        if (std::abs(raw[t - 1].steer) > limits.steer_max) du[t - 1][1] = 0.0;
        adjoint = jac.A.transpose() * adjoint;
      }
      grad->resize(2 * n);
      Eigen::Vector2d suffix = Eigen::Vector2d::Zero();
      for (int t = n - 1; t >= 0; --t) {
        suffix += du[t];
        (*grad)[2 * t] = scale[0] * suffix[0];
        (*grad)[2 * t + 1] = scale[1] * suffix[1];
      }
    }
    return loss;
  };

  AdamState adam = AdamState::Start(z);
  double best_loss = evaluate(z, nullptr);
  if (!std::isfinite(best_loss)) {
    throw DivergenceError("InferControls: non-finite initial loss");
  }
  Eigen::VectorXd best = z;
  Eigen::VectorXd grad;
  int iter = 0;
  for (; iter < options.iters; ++iter) {
    const double loss = evaluate(adam.params, &grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw DivergenceError(
          "InferControls: non-finite loss at iteration " +
          std::to_string(iter) + "; try a smaller learning_rate");
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = adam.params;
    }
    if (loss <= 1e-20 * n) break;
    const Eigen::VectorXd before = adam.params;
    adam = AdamStep(std::move(adam), grad, options.learning_rate, 0.9, 0.999,
                    1e-12);
    const Eigen::VectorXd step =
        (adam.params - before).cwiseMax(-options.clamp).cwiseMin(options.clamp);
    adam.params = before + step;
  }
  const double final_loss = evaluate(adam.params, nullptr);
  if (!std::isfinite(final_loss)) {
    throw DivergenceError("InferControls: non-finite loss; try a smaller "
                          "learning_rate");
  }
  if (final_loss < best_loss) {
    best_loss = final_loss;
    best = adam.params;
  }

  InferResult result;
  result.controls.mode = ControlMode::kAbsolute;
  result.controls.controls = controls_of(best, nullptr);
  result.fitted = Unroll(x0, result.controls, variant);
  result.rmse = std::sqrt(best_loss / n);
  result.iterations = iter;
  return result;
}

}  // namespace ebioc
