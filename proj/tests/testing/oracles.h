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

// Test-only energies and control problems with closed-form answers.

#ifndef EBIOC_TESTS_TESTING_ORACLES_H_
#define EBIOC_TESTS_TESTING_ORACLES_H_

#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ebioc/ilqr.h"
#include "ebioc/objective.h"

namespace ebioc::testing {

// E(z) = |z - center|^2 / 2
class QuadraticEnergy : public EnergyFunction {
 public:
  explicit QuadraticEnergy(Eigen::VectorXd center) : center_(std::move(center)) {}
  int dim() const override { return static_cast<int>(center_.size()); }
  double Evaluate(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const override {
    const Eigen::VectorXd d = z - center_;
    if (grad) *grad = d;
    return 0.5 * d.squaredNorm();
  }

 private:
  Eigen::VectorXd center_;
};

// x' = A x + B u, cost sum_t (x'Qx + u'Ru) / 2 + x_T' Qf x_T / 2.
class LqrProblem : public ControlProblem {
 public:
  LqrProblem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd q,
             Eigen::MatrixXd r, Eigen::MatrixXd qf, Eigen::VectorXd x0,
             int horizon)
      : a_(a), b_(b), q_(q), r_(r), qf_(qf), x0_(x0), horizon_(horizon) {}

  static LqrProblem Random(uint64_t seed, int n, int m, int horizon) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto rand = [&](int r, int c) {
      Eigen::MatrixXd x(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) x(i, j) = g(rng);
      return x;
    };
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + 0.1 * rand(n, n);
    Eigen::MatrixXd b = rand(n, m);
    Eigen::MatrixXd lq = rand(n, n);
    Eigen::MatrixXd lr = rand(m, m);
    Eigen::MatrixXd q = lq * lq.transpose() + Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd r = lr * lr.transpose() + Eigen::MatrixXd::Identity(m, m);
    return LqrProblem(a, b, q, r, 2.0 * q, rand(n, 1), horizon);
  }

  int state_dim() const override { return static_cast<int>(x0_.size()); }
  int control_dim() const override { return static_cast<int>(b_.cols()); }
  int horizon() const override { return horizon_; }
  Eigen::VectorXd initial_state() const override { return x0_; }
  Eigen::VectorXd Dynamics(int, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const override {
    return a_ * x + b_ * u;
  }
  double TotalCost(const std::vector<Eigen::VectorXd>& xs,
                   const std::vector<Eigen::VectorXd>& us) const override {
    double c = 0.0;
    for (int t = 0; t < horizon_; ++t) {
      c += 0.5 * xs[t].dot(q_ * xs[t]) + 0.5 * us[t].dot(r_ * us[t]);
    }
    return c + 0.5 * xs[horizon_].dot(qf_ * xs[horizon_]);
  }
  void Expand(const std::vector<Eigen::VectorXd>& xs,
              const std::vector<Eigen::VectorXd>& us,
              std::vector<StageExpansion>* stages,
              TerminalExpansion* terminal) const override {
    stages->assign(horizon_, StageExpansion());
    for (int t = 0; t < horizon_; ++t) {
      StageExpansion& s = (*stages)[t];
      s.A = a_;
      s.B = b_;
      s.lx = q_ * xs[t];
      s.lu = r_ * us[t];
      s.lxx = q_;
      s.luu = r_;
      s.lux = Eigen::MatrixXd::Zero(b_.cols(), x0_.size());
    }
    terminal->lx = qf_ * xs[horizon_];
    terminal->lxx = qf_;
  }

  // Optimal stacked controls from the dense quadratic program.
  Eigen::VectorXd DenseOptimum() const {
    const int n = state_dim(), m = control_dim();
    // x_t = Phi_t x0 + sum_{s<t} Gamma_{t,s} u_s
    std::vector<Eigen::MatrixXd> phi(horizon_ + 1);
    std::vector<Eigen::MatrixXd> gamma(horizon_ + 1,
                                       Eigen::MatrixXd::Zero(n, m * horizon_));
    phi[0] = Eigen::MatrixXd::Identity(n, n);
    for (int t = 1; t <= horizon_; ++t) {
      phi[t] = a_ * phi[t - 1];
      gamma[t] = a_ * gamma[t - 1];
      gamma[t].block(0, m * (t - 1), n, m) = b_;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m * horizon_, m * horizon_);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m * horizon_);
    for (int t = 0; t <= horizon_; ++t) {
      const Eigen::MatrixXd& w = t == horizon_ ? qf_ : q_;
      h += gamma[t].transpose() * w * gamma[t];
      g += gamma[t].transpose() * w * phi[t] * x0_;
      if (t < horizon_) h.block(m * t, m * t, m, m) += r_;
    }
    return h.llt().solve(-g);
  }

 private:
  Eigen::MatrixXd a_, b_, q_, r_, qf_;
  Eigen::VectorXd x0_;
  int horizon_;
};

}  // namespace ebioc::testing

#endif  // EBIOC_TESTS_TESTING_ORACLES_H_
