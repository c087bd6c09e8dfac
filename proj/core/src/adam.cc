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

#include "ebioc/adam.h"

#include <cmath>
#include <utility>

#include "ebioc/error.h"

namespace ebioc {

AdamState AdamState::Start(const Eigen::VectorXd& params) {
  AdamState state;
  state.params = params;
  state.m = Eigen::VectorXd::Zero(params.size());
  state.v = Eigen::VectorXd::Zero(params.size());
  return state;
}

AdamState AdamStep(AdamState state, const Eigen::VectorXd& grad, double lr,
                   double beta1, double beta2, double epsilon) {
  if (grad.size() != state.params.size()) {
    throw StructuralError("AdamStep: gradient size does not match parameters");
  }
  if (state.m.size() != grad.size()) state.m = Eigen::VectorXd::Zero(grad.size());
  if (state.v.size() != grad.size()) state.v = Eigen::VectorXd::Zero(grad.size());
  state.step += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    state.params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
  return state;
}

}  // namespace ebioc
