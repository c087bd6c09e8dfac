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

#include "ebioc/types.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ebioc/error.h"
#include "ebioc/logging.h"

namespace ebioc {

Control ControlLimits::Saturate(const Control& u) const {
  return {std::clamp(u.accel, -accel_max, accel_max),
          std::clamp(u.steer, -steer_max, steer_max)};
}

bool ControlLimits::Contains(const Control& u) const {
  return std::abs(u.accel) <= accel_max && std::abs(u.steer) <= steer_max;
}

ControlSequence ToAbsolute(const ControlSequence& seq, const Control& anchor) {
  if (seq.mode == ControlMode::kAbsolute) {
    LogWarning("ToAbsolute: sequence is already absolute; returned unchanged");
    return seq;
  }
  ControlSequence out;
  out.mode = ControlMode::kAbsolute;
  out.controls.reserve(seq.controls.size());
  Control running = anchor;
  for (const Control& du : seq.controls) {
    running.accel += du.accel;
    running.steer += du.steer;
    out.controls.push_back(running);
  }
  return out;
}

ControlSequence ToDelta(const ControlSequence& seq, const Control& anchor) {
  if (seq.mode == ControlMode::kDelta) {
    LogWarning("ToDelta: sequence is already in delta mode; returned unchanged");
    return seq;
  }
  ControlSequence out;
  out.mode = ControlMode::kDelta;
  out.controls.reserve(seq.controls.size());
  Control previous = anchor;
  for (const Control& u : seq.controls) {
    out.controls.push_back({u.accel - previous.accel, u.steer - previous.steer});
    previous = u;
  }
  return out;
}

double Environment::LaneOffset(double x) const {
  return lane[0] + x * (lane[1] + x * (lane[2] + x * lane[3]));
}

double Environment::LaneSlope(double x) const {
  return lane[1] + x * (2.0 * lane[2] + 3.0 * x * lane[3]);
}

double Environment::LaneSlopeRate(double x) const {
  return 2.0 * lane[2] + 6.0 * x * lane[3];
}

double WrapAngle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

namespace {

bool Finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) &&
         std::isfinite(s.h);
}

bool Finite(const Control& u) {
  return std::isfinite(u.accel) && std::isfinite(u.steer);
}

}  // namespace

void CheckRecord(const Demonstration& demo) {
  constexpr double kPi = std::numbers::pi;
  if (demo.history.frames.empty()) {
    throw StructuralError("demonstration has an empty history");
  }
  for (size_t i = 0; i < demo.history.frames.size(); ++i) {
    const HistoryFrame& f = demo.history.frames[i];
    if (!Finite(f.state) || !Finite(f.control)) {
      throw StructuralError("history frame " + std::to_string(i) +
                            " has non-finite fields");
    }
    if (f.state.v < 0.0) {
      throw StructuralError("history frame " + std::to_string(i) +
                            " has negative speed");
    }
    if (!(f.state.h > -kPi && f.state.h <= kPi)) {
      throw StructuralError("history frame " + std::to_string(i) +
                            " has heading outside (-pi, pi]");
    }
  }
  const Environment& env = demo.env;
  if (!(env.speed_limit > 0.0) || !std::isfinite(env.speed_limit)) {
    throw StructuralError("environment speed_limit must be > 0");
  }
  if (!(env.dt > 0.0) || !std::isfinite(env.dt)) {
    throw StructuralError("environment dt must be > 0");
  }
  for (double c : env.lane) {
    if (!std::isfinite(c)) throw StructuralError("non-finite lane coefficient");
  }
  if (!std::isfinite(env.goal.x) || !std::isfinite(env.goal.y)) {
    throw StructuralError("non-finite goal");
  }
  const int horizon = demo.expert.size();
  if (horizon <= 0) throw StructuralError("expert trajectory is empty");
  if (demo.expert.controls.size() != horizon) {
    throw StructuralError("expert has " + std::to_string(horizon) +
                          " states but " +
                          std::to_string(demo.expert.controls.size()) +
                          " controls");
  }
  for (size_t j = 0; j < env.obstacles.size(); ++j) {
    const auto& track = env.obstacles[j].positions;
    if (static_cast<int>(track.size()) < horizon) {
      throw StructuralError("obstacle track " + std::to_string(j) +
                            " is shorter than the horizon");
    }
    for (const Point2& p : track) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw StructuralError("obstacle track " + std::to_string(j) +
                              " has non-finite positions");
      }
    }
  }
  for (const State& s : demo.expert.states) {
    if (!Finite(s)) throw StructuralError("expert has non-finite states");
  }
  for (const Control& u : demo.expert.controls.controls) {
    if (!Finite(u)) throw StructuralError("expert has non-finite controls");
  }
}

}  // namespace ebioc
