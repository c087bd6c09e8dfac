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

// Iterative LQR on a generic discrete-time control problem
//
//   min_u  sum_{t<T} l_t(x_t, u_t) + l_T(x_T),   x_{t+1} = f_t(x_t, u_t),
//
// with a backward Riccati pass, Levenberg regularization of Q_uu when it is
// not positive definite, and a forward line search over a geometric grid of
// step lengths that keeps the best candidate and never accepts an increase.

#ifndef EBIOC_ILQR_H_
#define EBIOC_ILQR_H_

#include <vector>

#include <Eigen/Core>

#include "ebioc/objective.h"

namespace ebioc {

struct IlqrConfig {
  double lr_min = 0.001;
  double lr_max = 1.0;
  int lr_count = 10;  // geometric grid from lr_max down to lr_min
  int max_iter = 100;
  double early_stop = 0.001;  // stop when the accepted decrease is smaller
  double mu_min = 1e-6;
  double mu_max = 1e10;
};

// Quadratic model of one stage around the nominal trajectory.
struct StageExpansion {
  Eigen::MatrixXd A;    // df/dx
  Eigen::MatrixXd B;    // df/du
  Eigen::VectorXd lx;
  Eigen::VectorXd lu;
  Eigen::MatrixXd lxx;
  Eigen::MatrixXd luu;
  Eigen::MatrixXd lux;
};

struct TerminalExpansion {
  Eigen::VectorXd lx;
  Eigen::MatrixXd lxx;
};

class ControlProblem {
 public:
  virtual ~ControlProblem() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual int horizon() const = 0;
  virtual Eigen::VectorXd initial_state() const = 0;
  virtual Eigen::VectorXd Dynamics(int t, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) const = 0;
  // xs has horizon() + 1 entries, us has horizon()
  virtual double TotalCost(const std::vector<Eigen::VectorXd>& xs,
                           const std::vector<Eigen::VectorXd>& us) const = 0;
  virtual void Expand(const std::vector<Eigen::VectorXd>& xs,
                      const std::vector<Eigen::VectorXd>& us,
                      std::vector<StageExpansion>* stages,
                      TerminalExpansion* terminal) const = 0;
};

struct IlqrResult {
  std::vector<Eigen::VectorXd> us;
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> cost_trace;  // initial cost, then one per iteration
  int iterations = 0;
  bool converged = false;  // early stop triggered
  double final_decrease = 0.0;
  double max_regularization = 0.0;
};

IlqrResult SolveIlqr(const ControlProblem& problem,
                     std::vector<Eigen::VectorXd> init_us,
                     const IlqrConfig& config);

// Single-agent driving scene as a control problem over normalized delta
// controls. The state is augmented to (x, y, v, h, acc, prev_acc), where acc
// is the unsaturated control accumulator, so every frame cost is a function
// of the state alone. Frame costs are quadraticized by Gauss-Newton on the
// square roots of the (non-negative) features:
//   H_t = sum_k max(w_k, 0) / (2 max(phi_k, 1e-3)) J_k^T J_k
// with w = dC/dphi and J_k the feature Jacobian.
class DrivingProblem : public ControlProblem {
 public:
  // Throws UnsupportedError for non-Markovian costs or multi-agent scenes.
  explicit DrivingProblem(const SceneEnergy& energy);

  int state_dim() const override { return 8; }
  int control_dim() const override { return 2; }
  int horizon() const override { return energy_->horizon(); }
  Eigen::VectorXd initial_state() const override;
  Eigen::VectorXd Dynamics(int t, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const override;
  double TotalCost(const std::vector<Eigen::VectorXd>& xs,
                   const std::vector<Eigen::VectorXd>& us) const override;
  void Expand(const std::vector<Eigen::VectorXd>& xs,
              const std::vector<Eigen::VectorXd>& us,
              std::vector<StageExpansion>* stages,
              TerminalExpansion* terminal) const override;

  static Eigen::VectorXd Flatten(const std::vector<Eigen::VectorXd>& us);
  static std::vector<Eigen::VectorXd> Split(const Eigen::VectorXd& z);

 private:
  const SceneEnergy* energy_;
  const Demonstration* agent_;
  DynamicsVariant dynamics_;
  FeatureConfig features_;
  ControlLimits limits_;
};

}  // namespace ebioc

#endif  // EBIOC_ILQR_H_
