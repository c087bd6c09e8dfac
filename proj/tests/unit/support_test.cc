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

// Small building blocks: control-sequence modes, record checks, Adam, seed
// derivation and the parallel loop.

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "ebioc/adam.h"
#include "ebioc/error.h"
#include "ebioc/parallel.h"
#include "ebioc/random.h"
#include "ebioc/types.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

TEST(ControlModeTest, DeltaRoundTrip) {
  std::mt19937_64 rng(1);
  const ControlSequence abs = testing::RandomControls(rng, 12);
  const Control anchor{0.3, -0.02};
  const ControlSequence delta = ToDelta(abs, anchor);
  EXPECT_EQ(delta.mode, ControlMode::kDelta);
  EXPECT_NEAR(delta.controls[0].accel, abs.controls[0].accel - 0.3, 1e-15);
  const ControlSequence back = ToAbsolute(delta, anchor);
  EXPECT_EQ(back.mode, ControlMode::kAbsolute);
  for (int t = 0; t < 12; ++t) {
    EXPECT_NEAR(back.controls[t].accel, abs.controls[t].accel, 1e-12);
    EXPECT_NEAR(back.controls[t].steer, abs.controls[t].steer, 1e-12);
  }
}

TEST(ControlModeTest, ZeroDeltasHoldTheAnchor) {
  ControlSequence delta;
  delta.mode = ControlMode::kDelta;
  delta.controls.assign(5, Control{});
  const ControlSequence abs = ToAbsolute(delta, {1.5, 0.1});
  for (const Control& u : abs.controls) EXPECT_EQ(u, (Control{1.5, 0.1}));
}

TEST(ControlModeTest, WrongModeIsReturnedUnchanged) {
  std::mt19937_64 rng(2);
  const ControlSequence abs = testing::RandomControls(rng, 4);
  EXPECT_EQ(ToAbsolute(abs, {1.0, 0.0}), abs);
}

TEST(ControlLimitsTest, SaturatesPerComponent) {
  const ControlLimits limits{2.0, 0.3};
  EXPECT_EQ(limits.Saturate({5.0, -1.0}), (Control{2.0, -0.3}));
  EXPECT_EQ(limits.Saturate({-1.0, 0.1}), (Control{-1.0, 0.1}));
  EXPECT_TRUE(limits.Contains({2.0, 0.3}));
  EXPECT_FALSE(limits.Contains({2.01, 0.0}));
}

TEST(WrapAngleTest, MapsIntoHalfOpenInterval) {
  const double pi = std::numbers::pi;
  EXPECT_DOUBLE_EQ(WrapAngle(pi), pi);
  EXPECT_NEAR(WrapAngle(-pi), pi, 1e-12);
  EXPECT_NEAR(WrapAngle(3 * pi / 2), -pi / 2, 1e-12);
  EXPECT_NEAR(WrapAngle(0.25 + 4 * pi), 0.25, 1e-12);
}

TEST(EnvironmentTest, LaneCubic) {
  Environment env;
  env.lane = {1.0, 0.5, 0.25, 0.125};
  EXPECT_DOUBLE_EQ(env.LaneOffset(2.0), 1.0 + 1.0 + 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(env.LaneSlope(2.0), 0.5 + 1.0 + 1.5);
  EXPECT_DOUBLE_EQ(env.LaneSlopeRate(2.0), 0.5 + 1.5);
}

TEST(CheckRecordTest, AcceptsValidAndRejectsBroken) {
  const Demonstration ok = testing::RandomScene(3, 10);
  EXPECT_NO_THROW(CheckRecord(ok));
  Demonstration d = ok;
  d.history.frames.clear();
  EXPECT_THROW(CheckRecord(d), StructuralError);
  d = ok;
  d.env.obstacles[0].positions.pop_back();
  EXPECT_THROW(CheckRecord(d), StructuralError);
  d = ok;
  d.expert.controls.controls.pop_back();
  EXPECT_THROW(CheckRecord(d), StructuralError);
  d = ok;
  d.env.dt = 0.0;
  EXPECT_THROW(CheckRecord(d), StructuralError);
  d = ok;
  d.history.frames.back().state.v = -1.0;
  EXPECT_THROW(CheckRecord(d), StructuralError);
  d = ok;
  d.expert.states[3].x = std::nan("");
  EXPECT_THROW(CheckRecord(d), StructuralError);
}

TEST(AdamTest, FirstStepMovesByLearningRateAgainstGradient) {
  AdamState s = AdamState::Start(Eigen::Vector3d(1.0, 2.0, 3.0));
  s = AdamStep(std::move(s), Eigen::Vector3d(0.5, -4.0, 0.0), 0.1, 0.9, 0.999,
               0.0 + 1e-12);
  EXPECT_NEAR(s.params[0], 0.9, 1e-9);
  EXPECT_NEAR(s.params[1], 2.1, 1e-9);
  EXPECT_NEAR(s.params[2], 3.0, 1e-9);
  EXPECT_EQ(s.step, 1);
}

TEST(AdamTest, MatchesHandRolledRecursion) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const double lr = 0.05, b1 = 0.5, b2 = 0.5, eps = 1e-8;
  Eigen::VectorXd p = Eigen::VectorXd::Random(4);
  AdamState s = AdamState::Start(p);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(4), v = Eigen::VectorXd::Zero(4);
  for (int t = 1; t <= 20; ++t) {
    Eigen::VectorXd grad(4);
    for (int i = 0; i < 4; ++i) grad[i] = g(rng);
    s = AdamStep(std::move(s), grad, lr, b1, b2, eps);
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad.cwiseAbs2();
    for (int i = 0; i < 4; ++i) {
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      p[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
  EXPECT_LT((s.params - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AdamTest, MinimizesQuadratic) {
  AdamState s = AdamState::Start(Eigen::Vector2d(3.0, -2.0));
  for (int t = 0; t < 2000; ++t) {
    const Eigen::VectorXd grad = s.params - Eigen::Vector2d(1.0, 1.0);
    s = AdamStep(std::move(s), grad, 0.01 / (1.0 + 0.01 * t), AdamConfig{});
  }
  EXPECT_LT((s.params - Eigen::Vector2d(1.0, 1.0)).norm(), 1e-2);
}

TEST(AdamTest, SizeMismatchThrows) {
  AdamState s = AdamState::Start(Eigen::Vector2d::Zero());
  EXPECT_THROW(AdamStep(s, Eigen::Vector3d::Zero(), 0.1, AdamConfig{}),
               StructuralError);
}

TEST(RandomTest, SplitMix64ReferenceValues) {
  uint64_t state = 0;
  EXPECT_EQ(SplitMix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(SplitMix64(state), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(SplitMix64(state), 0x06c45d188009454fULL);
}

TEST(RandomTest, DeriveSeedIsDeterministicAndSeparatesStreams) {
  EXPECT_EQ(DeriveSeed(7, "data", {1, 2}), DeriveSeed(7, "data", {1, 2}));
  std::set<uint64_t> seen;
  for (uint64_t base : {0ULL, 1ULL, 2ULL}) {
    for (const char* name : {"data", "init", "agent"}) {
      for (uint64_t k = 0; k < 20; ++k) {
        seen.insert(DeriveSeed(base, name, {k}));
      }
      seen.insert(DeriveSeed(base, name));
    }
  }
  EXPECT_EQ(seen.size(), 3u * 3u * 21u);
  EXPECT_NE(DeriveSeed(1, "x", {1, 2}), DeriveSeed(1, "x", {2, 1}));
}

TEST(RandomTest, NormalSourceReproducible) {
  NormalSource a(42), b(42);
  EXPECT_EQ(a.Vector(16), b.Vector(16));
  NormalSource c(43);
  EXPECT_NE(a.Vector(4), c.Vector(4));
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  for (int workers : {1, 2, 4, 16}) {
    std::vector<std::atomic<int>> hits(97);
    ParallelFor(97, workers, [&](int i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(ParallelForTest, ResultsIndependentOfWorkerCount) {
  auto run = [](int workers) {
    std::vector<double> out(50);
    ParallelFor(50, workers, [&](int i) {
      NormalSource s(DeriveSeed(3, "job", {static_cast<uint64_t>(i)}));
      out[i] = s.Vector(10).sum();
    });
    return out;
  };
  EXPECT_EQ(run(1), run(3));
}

TEST(ParallelForTest, RethrowsLowestIndexError) {
  for (int workers : {1, 4}) {
    try {
      ParallelFor(10, workers, [](int i) {
        if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "3");
    }
  }
}

}  // namespace
}  // namespace ebioc
