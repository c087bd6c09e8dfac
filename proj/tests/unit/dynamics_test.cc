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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ebioc/error.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

constexpr double kDt = 0.1;

// Direct evaluation of the corrected bicycle update.
State BicycleOracle(const State& s, const Control& u, double dt, double L) {
  State n;
  n.x = s.x + s.v * dt * std::cos(s.h);
  n.y = s.y + s.v * dt * std::sin(s.h);
  n.v = s.v + u.accel * dt;
  n.h = s.h + s.v * dt / L * std::tan(u.steer);
  return n;
}

TEST(StepTest, CorrectedStraightLine) {
  const State n = Step({0, 0, 10, 0}, {0, 0}, {});
  EXPECT_DOUBLE_EQ(n.x, 1.0);
  EXPECT_DOUBLE_EQ(n.y, 0.0);
  EXPECT_DOUBLE_EQ(n.v, 10.0);
  EXPECT_DOUBLE_EQ(n.h, 0.0);
}

TEST(StepTest, CorrectedMatchesFormulaOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const State s{10 * u(rng), 5 * u(rng), 10 + 5 * u(rng), u(rng)};
    const Control c{3 * u(rng), 0.5 * u(rng)};
    const State a = Step(s, c, {});
    const State b = BicycleOracle(s, c, kDt, 3.0);
    EXPECT_EQ(a, b);
  }
  const State n = Step({0, 0, 10, 0}, {1.0, 0.1}, {});
  EXPECT_DOUBLE_EQ(n.x, 1.0);
  EXPECT_DOUBLE_EQ(n.v, 10.1);
  EXPECT_NEAR(n.h, 1.0 / 3.0 * std::tan(0.1), 1e-15);
}

TEST(StepTest, LiteralAtZeroHeading) {
  DynamicsVariant lit;
  lit.model = DynamicsModel::kPaperLiteral;
  const State n = Step({0, 0, 10, 0}, {0, 0}, lit);
  // r = 3 + 10 * 0.1 - 3 = 1; x' = x + sin(0) r, y' = y + cos(0) r, and the
  // speed and heading updates read x on their right-hand sides.
  EXPECT_NEAR(n.x, 0.0, 1e-15);
  EXPECT_NEAR(n.y, 1.0, 1e-15);
  EXPECT_NEAR(n.v, 0.0, 1e-15);
  EXPECT_NEAR(n.h, 0.0, 1e-15);
}

TEST(StepTest, LiteralDomainErrors) {
  DynamicsVariant lit;
  lit.model = DynamicsModel::kPaperLiteral;
  EXPECT_THROW(Step({0, 0, 0, 0}, {0, 0.1}, lit), DomainError);
  // sqrt radicand negative: h dt sin(steer) > 3
  EXPECT_THROW(Step({0, 0, 10, 100}, {0, 1.5}, lit), DomainError);
  EXPECT_THROW(Step({0, 0, 10, 0}, {0, 1.6}, {}), DomainError);
  try {
    Step({0, 0, 10, 100}, {0, 1.5}, lit);
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("sqrt"), std::string::npos);
  }
}

void CheckJacobians(const DynamicsVariant& variant, const State& s,
                    const Control& c) {
  const StepJacobian jac = StepJacobians(s, c, variant);
  const double eps = 1e-6;
  auto vec = [](const State& x) {
    return Eigen::Vector4d(x.x, x.y, x.v, x.h);
  };
  for (int j = 0; j < 4; ++j) {
    State p = s, m = s;
    double* pp[] = {&p.x, &p.y, &p.v, &p.h};
    double* mm[] = {&m.x, &m.y, &m.v, &m.h};
    *pp[j] += eps;
    *mm[j] -= eps;
    const Eigen::Vector4d fd =
        (vec(Step(p, c, variant)) - vec(Step(m, c, variant))) / (2 * eps);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(jac.A(i, j), fd[i], 1e-6 * std::max(1.0, std::abs(fd[i])))
          << "A(" << i << "," << j << ")";
    }
  }
  for (int j = 0; j < 2; ++j) {
    Control p = c, m = c;
    (j == 0 ? p.accel : p.steer) += eps;
    (j == 0 ? m.accel : m.steer) -= eps;
    const Eigen::Vector4d fd =
        (vec(Step(s, p, variant)) - vec(Step(s, m, variant))) / (2 * eps);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(jac.B(i, j), fd[i], 1e-6 * std::max(1.0, std::abs(fd[i])))
          << "B(" << i << "," << j << ")";
    }
  }
}

TEST(StepJacobiansTest, MatchFiniteDifferencesBothVariants) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DynamicsVariant lit;
  lit.model = DynamicsModel::kPaperLiteral;
  for (int i = 0; i < 100; ++i) {
    const State s{10 * u(rng), 5 * u(rng), 10 + 5 * u(rng), 0.5 * u(rng)};
    const Control c{3 * u(rng), 0.5 * u(rng)};
    CheckJacobians({}, s, c);
    CheckJacobians(lit, s, c);
  }
}

TEST(StepJacobiansTest, StraightLineStructure) {
  const StepJacobian jac = StepJacobians({0, 0, 10, 0}, {0, 0}, {});
  EXPECT_DOUBLE_EQ(jac.A(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(jac.A(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(jac.A(0, 2), kDt);
  EXPECT_DOUBLE_EQ(jac.A(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(jac.B(2, 0), kDt);
  EXPECT_DOUBLE_EQ(jac.B(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(jac.B(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(jac.B(3, 0), 0.0);
}

TEST(UnrollTest, ConstantVelocity) {
  ControlSequence seq;
  seq.controls.assign(5, {0, 0});
  const Trajectory traj = Unroll({0, 0, 10, 0}, seq, {});
  ASSERT_EQ(traj.size(), 5);
  for (int t = 0; t < 5; ++t) {
    EXPECT_NEAR(traj.states[t].x, t + 1.0, 1e-12);
    EXPECT_EQ(traj.states[t].y, 0.0);
  }
}

TEST(UnrollTest, BrakingClosedForm) {
  ControlSequence seq;
  seq.controls.assign(20, {-2.0, 0.0});
  const Trajectory traj = Unroll({0, 0, 10, 0}, seq, {});
  double x = 0.0, v = 10.0;
  for (int t = 0; t < 20; ++t) {
    x += v * kDt;  // position uses the speed before the update
    v = 10.0 - 0.2 * (t + 1);
    EXPECT_NEAR(traj.states[t].v, v, 1e-12);
    EXPECT_NEAR(traj.states[t].x, x, 1e-12);
  }
}

TEST(UnrollTest, DeltaModeKeepsMode) {
  ControlSequence seq;
  seq.mode = ControlMode::kDelta;
  seq.controls = {{0.1, 0}, {0.1, 0}};
  const Trajectory traj = Unroll({0, 0, 10, 0}, seq, {}, {0, 0});
  EXPECT_EQ(traj.controls.mode, ControlMode::kDelta);
  EXPECT_NEAR(traj.states[1].v, 10.0 + 0.01 + 0.02, 1e-12);
}

TEST(UnrollTest, ErrorCarriesStep) {
  DynamicsVariant lit;
  lit.model = DynamicsModel::kPaperLiteral;
  ControlSequence seq;
  seq.controls.assign(3, {0, 0.1});
  // x = 0 makes the next speed zero, so step 1 fails
  try {
    Unroll({0, 0, 10, 0}, seq, lit);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.step(), 1);
  }
}

TEST(UnrollTest, Deterministic) {
  std::mt19937_64 rng(5);
  const ControlSequence seq = testing::RandomControls(rng, 40);
  EXPECT_EQ(Unroll({0, 0, 10, 0}, seq, {}), Unroll({0, 0, 10, 0}, seq, {}));
}

TEST(ValidateTest, RoundTripAndOffset) {
  Demonstration d = testing::RandomScene(1, 20);
  EXPECT_TRUE(ValidateDemonstration(d, 1e-9).consistent);
  for (State& s : d.expert.states) s.x += 1.0;
  const ValidationReport r = ValidateDemonstration(d, 1e-3);
  EXPECT_FALSE(r.consistent);
  EXPECT_NEAR(r.max_error, 1.0, 1e-9);
}

TEST(ValidateTest, LengthMismatchIsStructural) {
  Demonstration d = testing::RandomScene(1, 20);
  d.expert.states.pop_back();
  EXPECT_THROW(ValidateDemonstration(d, 1e-3), StructuralError);
}

TEST(ValidateTest, SteerZeroPreservesHeading) {
  ControlSequence seq;
  for (int t = 0; t < 10; ++t) seq.controls.push_back({0.3 * t, 0.0});
  const State x0{1, 2, 8, 0.4};
  const Trajectory traj = Unroll(x0, seq, {});
  State prev = x0;
  for (const State& s : traj.states) {
    EXPECT_EQ(s.h, 0.4);
    EXPECT_NEAR(std::atan2(s.y - prev.y, s.x - prev.x), 0.4, 1e-12);
    prev = s;
  }
}

TEST(InferControlsTest, NoiselessRoundTrip) {
  std::mt19937_64 rng(9);
  const State x0{0, 0, 12, 0.02};
  const Control anchor{0.2, 0.01};
  const ControlSequence truth = testing::RandomControls(rng, 40, 1.0, 0.05);
  const Trajectory traj = Unroll(x0, truth, {});
  std::vector<Point2> positions = {{x0.x, x0.y}};
  for (const State& s : traj.states) positions.push_back({s.x, s.y});
  const InferResult r = InferControls(positions, x0, anchor, {});
  EXPECT_LT(r.rmse, 0.01);
  EXPECT_EQ(r.controls.size(), 40);
  EXPECT_TRUE(ValidateDemonstration(
                  {{{{x0, anchor}}}, {}, r.fitted}, 1e-9)
                  .consistent);
}

TEST(InferControlsTest, ConstantVelocityGivesZeroControls) {
  std::vector<Point2> positions;
  for (int t = 0; t <= 30; ++t) positions.push_back({1.0 * t, 0.0});
  const InferResult r = InferControls(positions, {0, 0, 10, 0}, {0, 0}, {});
  for (const Control& c : r.controls.controls) {
    EXPECT_NEAR(c.accel, 0.0, 1e-3);
    EXPECT_NEAR(c.steer, 0.0, 1e-3);
  }
}

TEST(InferControlsTest, TooFewPositions) {
  const std::vector<Point2> positions = {{0, 0}};
  EXPECT_THROW(InferControls(positions, {0, 0, 10, 0}, {0, 0}, {}),
               StructuralError);
}

}  // namespace
}  // namespace ebioc
