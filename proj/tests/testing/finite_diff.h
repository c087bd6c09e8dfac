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

// Finite-difference helpers shared by the tests.

#ifndef EBIOC_TESTS_TESTING_FINITE_DIFF_H_
#define EBIOC_TESTS_TESTING_FINITE_DIFF_H_

#include <algorithm>
#include <functional>

#include <Eigen/Core>

namespace ebioc::testing {

inline Eigen::VectorXd CentralDifference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double eps) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, m = x;
    p[i] += eps;
    m[i] -= eps;
    g[i] = (f(p) - f(m)) / (2 * eps);
  }
  return g;
}

// max_i |a_i - b_i| / max(max_i |b_i|, floor)
inline double RelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            double floor = 1e-12) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace ebioc::testing

#endif  // EBIOC_TESTS_TESTING_FINITE_DIFF_H_
