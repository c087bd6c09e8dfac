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

#include "ebioc/ilqr.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "ebioc/error.h"
#include "ebioc/logging.h"

namespace ebioc {
namespace {

std::vector<Eigen::VectorXd> RolloutStates(const ControlProblem& problem,
                                           const std::vector<Eigen::VectorXd>& us) {
  std::vector<Eigen::VectorXd> xs;
  xs.reserve(us.size() + 1);
  xs.push_back(problem.initial_state());
  for (int t = 0; t < static_cast<int>(us.size()); ++t) {
    xs.push_back(problem.Dynamics(t, xs.back(), us[t]));
  }
  return xs;
}

struct Gains {
  std::vector<Eigen::VectorXd> k;
  std::vector<Eigen::MatrixXd> K;
};

// Returns false when Q_uu is not positive definite at some stage.
bool BackwardPass(const std::vector<StageExpansion>& stages,
                  const TerminalExpansion& terminal, double mu, Gains* gains) {
  const int horizon = static_cast<int>(stages.size());
  gains->k.assign(horizon, Eigen::VectorXd());
  gains->K.assign(horizon, Eigen::MatrixXd());
  Eigen::VectorXd vx = terminal.lx;
  Eigen::MatrixXd vxx = terminal.lxx;
  for (int t = horizon - 1; t >= 0; --t) {
    const StageExpansion& s = stages[t];
    const Eigen::VectorXd qx = s.lx + s.A.transpose() * vx;
    const Eigen::VectorXd qu = s.lu + s.B.transpose() * vx;
    const Eigen::MatrixXd vxx_a = vxx * s.A;
    const Eigen::MatrixXd qxx = s.lxx + s.A.transpose() * vxx_a;
    Eigen::MatrixXd quu = s.luu + s.B.transpose() * vxx * s.B;
    const Eigen::MatrixXd qux = s.lux + s.B.transpose() * vxx_a;
    quu = 0.5 * (quu + quu.transpose());
    quu.diagonal().array() += mu;
    Eigen::LLT<Eigen::MatrixXd> llt(quu);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd k = -llt.solve(qu);
    const Eigen::MatrixXd K = -llt.solve(qux);
    vx = qx + K.transpose() * quu * k + K.transpose() * qu +
         qux.transpose() * k;
    vxx = qxx + K.transpose() * quu * K + K.transpose() * qux +
          qux.transpose() * K;
    vxx = 0.5 * (vxx + vxx.transpose());
    gains->k[t] = k;
    gains->K[t] = K;
  }
  return true;
}

}  // namespace

IlqrResult SolveIlqr(const ControlProblem& problem,
                     std::vector<Eigen::VectorXd> init_us,
                     const IlqrConfig& config) {
  const int horizon = problem.horizon();
  if (static_cast<int>(init_us.size()) != horizon) {
    throw StructuralError("iLQR initialization has " +
                          std::to_string(init_us.size()) + " controls, horizon " +
                          std::to_string(horizon));
  }
  if (config.lr_count < 1 || !(config.lr_min > 0.0) ||
      !(config.lr_max >= config.lr_min)) {
    throw ConfigError("iLQR learning-rate grid is invalid");
  }
  std::vector<double> grid;
  for (int i = 0; i < config.lr_count; ++i) {
    const double frac = config.lr_count == 1 ? 0.0 : double(i) / (config.lr_count - 1);
    grid.push_back(config.lr_max * std::pow(config.lr_min / config.lr_max, frac));
  }

  IlqrResult result;
  result.us = std::move(init_us);
  result.xs = RolloutStates(problem, result.us);
  double cost = problem.TotalCost(result.xs, result.us);
  if (!std::isfinite(cost)) throw DivergenceError("iLQR initial cost is not finite");
  result.cost_trace.push_back(cost);

  double mu = 0.0;
  std::vector<StageExpansion> stages;
  TerminalExpansion terminal;
  Gains gains;
  for (int iter = 0; iter < config.max_iter; ++iter) {
    problem.Expand(result.xs, result.us, &stages, &terminal);
    while (!BackwardPass(stages, terminal, mu, &gains)) {
      mu = std::max(config.mu_min, mu * 10.0);
      if (mu > config.mu_max) {
        throw DivergenceError("iLQR regularization exceeded its maximum");
      }
      LogDebug("iLQR: Q_uu not positive definite, regularization raised to " +
               std::to_string(mu));
    }
    result.max_regularization = std::max(result.max_regularization, mu);

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> best_us, best_xs;
    for (double alpha : grid) {
      std::vector<Eigen::VectorXd> us(horizon);
      std::vector<Eigen::VectorXd> xs;
      xs.reserve(horizon + 1);
      xs.push_back(problem.initial_state());
      bool ok = true;
      try {
        for (int t = 0; t < horizon; ++t) {
          us[t] = result.us[t] + alpha * gains.k[t] +
                  gains.K[t] * (xs[t] - result.xs[t]);
          xs.push_back(problem.Dynamics(t, xs[t], us[t]));
        }
      } catch (const DomainError&) {
        ok = false;
      }
      if (!ok) continue;
      const double c = problem.TotalCost(xs, us);
      if (std::isfinite(c) && c < best_cost) {
        best_cost = c;
        best_us = std::move(us);
        best_xs = std::move(xs);
      }
    }
    result.iterations = iter + 1;
    if (best_cost < cost) {
      const double decrease = cost - best_cost;
      result.us = std::move(best_us);
      result.xs = std::move(best_xs);
      cost = best_cost;
      result.cost_trace.push_back(cost);
      result.final_decrease = decrease;
      mu = mu / 10.0 < config.mu_min ? 0.0 : mu / 10.0;
      if (decrease < config.early_stop) {
        result.converged = true;
        break;
      }
    } else {
      // no candidate improves the cost: treat as stationary
      result.cost_trace.push_back(cost);
      result.final_decrease = 0.0;
      result.converged = true;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------- driving

DrivingProblem::DrivingProblem(const SceneEnergy& energy)
    : energy_(&energy),
      agent_(&energy.agent(0)),
      dynamics_(energy.dynamics().WithDt(energy.agent(0).env.dt)),
      features_(energy.features()),
      limits_(energy.limits()) {
  if (!energy.model().markovian()) {
    throw UnsupportedError("iLQR requires a per-frame (Markovian) cost; the " +
                           ToString(energy.model().kind()) +
                           " cost is not");
  }
  if (energy.num_agents() != 1) {
    throw UnsupportedError("iLQR supports single-agent scenes only");
  }
}

Eigen::VectorXd DrivingProblem::initial_state() const {
  const State& x0 = agent_->history.initial_state();
  const Control& u0 = agent_->history.last_control();
  Eigen::VectorXd s(8);
  s << x0.x, x0.y, x0.v, x0.h, u0.accel, u0.steer, u0.accel, u0.steer;
  return s;
}

Eigen::VectorXd DrivingProblem::Dynamics(int, const Eigen::VectorXd& s,
                                         const Eigen::VectorXd& z) const {
  const Eigen::Vector2d& std = energy_->model().normalizer().control_std;
  const Eigen::Vector2d acc = s.segment<2>(4) + std.cwiseProduct(z);
  const Control u = limits_.Saturate({acc[0], acc[1]});
  const State next = Step({s[0], s[1], s[2], s[3]}, u, dynamics_);
  Eigen::VectorXd out(8);
  out << next.x, next.y, next.v, next.h, acc[0], acc[1], s[4], s[5];
  return out;
}

namespace {

struct DrivingFrames {
  FrameFeatureMatrix frames;
  std::vector<FrameJacobian> jacobians;
};

DrivingFrames ComputeDrivingFrames(const Demonstration& agent,
                                   const std::vector<Eigen::VectorXd>& xs,
                                   const ControlLimits& limits,
                                   const FeatureConfig& config,
                                   bool with_jacobians) {
  const int horizon = static_cast<int>(xs.size()) - 1;
  DrivingFrames out;
  out.frames.resize(horizon, kNumFeatures);
  if (with_jacobians) out.jacobians.resize(horizon);
  for (int i = 0; i < horizon; ++i) {
    const Eigen::VectorXd& s = xs[i + 1];
    const std::vector<Point2> obstacles = ObstaclesAt(agent.env, i);
    FrameInput in;
    in.state = {s[0], s[1], s[2], s[3]};
    in.control = limits.Saturate({s[4], s[5]});
    in.prev_control = i == 0 ? agent.history.last_control()
                             : limits.Saturate({s[6], s[7]});
    in.env = &agent.env;
    in.obstacles = obstacles;
    in.final_frame = i == horizon - 1;
    out.frames.row(i) =
        FrameFeatures(in, config, with_jacobians ? &out.jacobians[i] : nullptr)
            .transpose();
  }
  return out;
}

}  // namespace

double DrivingProblem::TotalCost(const std::vector<Eigen::VectorXd>& xs,
                                 const std::vector<Eigen::VectorXd>&) const {
  return energy_->model().Value(
      ComputeDrivingFrames(*agent_, xs, limits_, features_, false).frames);
}

void DrivingProblem::Expand(const std::vector<Eigen::VectorXd>& xs,
                            const std::vector<Eigen::VectorXd>& us,
                            std::vector<StageExpansion>* stages,
                            TerminalExpansion* terminal) const {
  const int horizon = this->horizon();
  const DrivingFrames f =
      ComputeDrivingFrames(*agent_, xs, limits_, features_, true);
  FrameFeatureMatrix df;
  energy_->model().Backward(f.frames, &df, nullptr);

  // gradient and Gauss-Newton Hessian of frame i w.r.t. augmented state s_{i+1}
  auto frame_expansion = [&](int i, Eigen::VectorXd* lx, Eigen::MatrixXd* lxx) {
    const Eigen::VectorXd& s = xs[i + 1];
    const FrameJacobian& jac = f.jacobians[i];
    Eigen::Matrix<double, kNumFeatures, 8> J =
        Eigen::Matrix<double, kNumFeatures, 8>::Zero();
    J.leftCols<4>() = jac.d_state;
    if (std::abs(s[4]) <= limits_.accel_max) J.col(4) = jac.d_control.col(0);
    if (std::abs(s[5]) <= limits_.steer_max) J.col(5) = jac.d_control.col(1);
    if (i > 0) {
      if (std::abs(s[6]) <= limits_.accel_max) J.col(6) = jac.d_prev_control.col(0);
      if (std::abs(s[7]) <= limits_.steer_max) J.col(7) = jac.d_prev_control.col(1);
    }
    const Eigen::Matrix<double, kNumFeatures, 1> w = df.row(i).transpose();
    *lx = J.transpose() * w;
    *lxx = Eigen::MatrixXd::Zero(8, 8);
    for (int k = 0; k < kNumFeatures; ++k) {
      if (w[k] <= 0.0) continue;
      const double phi = std::max(std::abs(f.frames(i, k)), 1e-3);
      *lxx += (w[k] / (2.0 * phi)) * J.row(k).transpose() * J.row(k);
    }
  };

  const Eigen::Vector2d& std = energy_->model().normalizer().control_std;
  stages->assign(horizon, StageExpansion());
  for (int t = 0; t < horizon; ++t) {
    StageExpansion& st = (*stages)[t];
    const Eigen::VectorXd& s = xs[t];
    const Eigen::Vector2d acc = s.segment<2>(4) + std.cwiseProduct(us[t]);
    const Control u = limits_.Saturate({acc[0], acc[1]});
    const StepJacobian sj = StepJacobians({s[0], s[1], s[2], s[3]}, u, dynamics_);
    Eigen::Matrix<double, 4, 2> bm = sj.B;
    if (std::abs(acc[0]) > limits_.accel_max) bm.col(0).setZero();
    if (std::abs(acc[1]) > limits_.steer_max) bm.col(1).setZero();
    st.A = Eigen::MatrixXd::Zero(8, 8);
    st.A.topLeftCorner<4, 4>() = sj.A;
    st.A.block<4, 2>(0, 4) = bm;
    st.A.block<2, 2>(4, 4).setIdentity();
    st.A.block<2, 2>(6, 4).setIdentity();
    st.B = Eigen::MatrixXd::Zero(8, 2);
    st.B.topRows<4>() = bm * std.asDiagonal();
    st.B.block<2, 2>(4, 0) = std.asDiagonal();
    st.lu = Eigen::VectorXd::Zero(2);
    st.luu = Eigen::MatrixXd::Zero(2, 2);
    st.lux = Eigen::MatrixXd::Zero(2, 8);
    if (t == 0) {
      st.lx = Eigen::VectorXd::Zero(8);
      st.lxx = Eigen::MatrixXd::Zero(8, 8);
    } else {
      frame_expansion(t - 1, &st.lx, &st.lxx);
    }
  }
  frame_expansion(horizon - 1, &terminal->lx, &terminal->lxx);
}

Eigen::VectorXd DrivingProblem::Flatten(const std::vector<Eigen::VectorXd>& us) {
  Eigen::VectorXd z(2 * us.size());
  for (size_t t = 0; t < us.size(); ++t) z.segment<2>(2 * t) = us[t];
  return z;
}

std::vector<Eigen::VectorXd> DrivingProblem::Split(const Eigen::VectorXd& z) {
  std::vector<Eigen::VectorXd> us(z.size() / 2);
  for (size_t t = 0; t < us.size(); ++t) us[t] = z.segment<2>(2 * t);
  return us;
}

}  // namespace ebioc
