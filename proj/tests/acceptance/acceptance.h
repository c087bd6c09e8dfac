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

#ifndef EBIOC_TESTS_ACCEPTANCE_ACCEPTANCE_H_
#define EBIOC_TESTS_ACCEPTANCE_ACCEPTANCE_H_

#include <functional>
#include <string>
#include <vector>

namespace ebioc::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

Outcome GradientFidelity();         // 1
Outcome LangevinStationarity();     // 2
Outcome IlqrOracle();               // 3
Outcome MomentMatching();           // 4
Outcome CostRecoveryRanking();      // 5
Outcome InverseDynamicsRoundTrip(); // 6
Outcome CooperativeTrend();         // 7
Outcome MultiagentReduction();      // 8
Outcome MetricCorrectness();        // 9
Outcome Determinism();              // 10

const std::vector<Criterion>& AllCriteria();

// printf-style formatting into a std::string
std::string Format(const char* fmt, ...);

}  // namespace ebioc::acceptance

#endif  // EBIOC_TESTS_ACCEPTANCE_ACCEPTANCE_H_
