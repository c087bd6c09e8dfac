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

#ifndef EBIOC_ADAM_H_
#define EBIOC_ADAM_H_

#include <cstdint>
#include <utility>

#include <Eigen/Core>

namespace ebioc {

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.5;
  double beta2 = 0.5;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd params;
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd v;  // second moment
  int64_t step = 0;

  static AdamState Start(const Eigen::VectorXd& params);
};

// One bias-corrected Adam update that descends `grad`:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   params <- params - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
AdamState AdamStep(AdamState state, const Eigen::VectorXd& grad, double lr,
                   double beta1, double beta2, double epsilon);

inline AdamState AdamStep(AdamState state, const Eigen::VectorXd& grad,
                          double lr, const AdamConfig& config) {
  return AdamStep(std::move(state), grad, lr, config.beta1, config.beta2,
                  config.epsilon);
}

}  // namespace ebioc

#endif  // EBIOC_ADAM_H_
