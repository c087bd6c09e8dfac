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

// Domain data model: vehicle state and control, control sequences in absolute
// or first-difference form, trajectories, environment and demonstrations.
//
// Conventions: x is longitudinal (direction of travel at t = 0), y lateral,
// heading h measured from the +x axis. A trajectory of horizon T holds states
// x_1..x_T and controls u_1..u_T with x_t = f(x_{t-1}, u_t); x_0 and u_0 are
// the last frame of the history.

#ifndef EBIOC_TYPES_H_
#define EBIOC_TYPES_H_

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace ebioc {

struct State {
  double x = 0.0;  // longitudinal position (m)
  double y = 0.0;  // lateral position (m)
  double v = 0.0;  // speed (m/s)
  double h = 0.0;  // heading (rad)

  bool operator==(const State&) const = default;
};

struct Control {
  double accel = 0.0;  // m/s^2
  double steer = 0.0;  // rad

  bool operator==(const Control&) const = default;
};

struct ControlLimits {
  double accel_max = 5.0;
  double steer_max = 0.6;

  Control Saturate(const Control& u) const;
  bool Contains(const Control& u) const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

enum class ControlMode { kAbsolute, kDelta };

// Ordered controls u_1..u_T. In delta mode element t stores u_t - u_{t-1},
// anchored at the last history control.
struct ControlSequence {
  std::vector<Control> controls;
  ControlMode mode = ControlMode::kAbsolute;

  int size() const { return static_cast<int>(controls.size()); }
  bool operator==(const ControlSequence&) const = default;
};

// Prefix-sums a delta-mode sequence from `anchor`. An absolute-mode input is
// returned unchanged and a warning is logged.
ControlSequence ToAbsolute(const ControlSequence& seq, const Control& anchor);

// First-differences an absolute-mode sequence against `anchor`. A delta-mode
// input is returned unchanged and a warning is logged.
ControlSequence ToDelta(const ControlSequence& seq, const Control& anchor);

struct Trajectory {
  std::vector<State> states;  // x_1..x_T
  ControlSequence controls;   // u_1..u_T

  int size() const { return static_cast<int>(states.size()); }
  bool operator==(const Trajectory&) const = default;
};

// Positions of another vehicle, one per frame: positions[t] is aligned with
// states[t] of the ego trajectory.
struct OtherVehicleTrack {
  std::vector<Point2> positions;

  bool operator==(const OtherVehicleTrack&) const = default;
};

struct Environment {
  // lateral lane-center offset y = c0 + c1 x + c2 x^2 + c3 x^3
  std::array<double, 4> lane = {0.0, 0.0, 0.0, 0.0};
  double speed_limit = 30.0;  // m/s
  Point2 goal;
  std::vector<OtherVehicleTrack> obstacles;
  double dt = 0.1;

  double LaneOffset(double x) const;
  double LaneSlope(double x) const;      // dy/dx
  double LaneSlopeRate(double x) const;  // d^2y/dx^2
  double LaneHeading(double x) const { return std::atan(LaneSlope(x)); }

  bool operator==(const Environment&) const = default;
};

struct HistoryFrame {
  State state;
  Control control;

  bool operator==(const HistoryFrame&) const = default;
};

// Frames t = -k..0; the last frame holds x_0 and the anchor control u_0.
struct History {
  std::vector<HistoryFrame> frames;

  const State& initial_state() const { return frames.back().state; }
  const Control& last_control() const { return frames.back().control; }
  bool operator==(const History&) const = default;
};

struct Demonstration {
  History history;
  Environment env;
  Trajectory expert;

  int horizon() const { return expert.size(); }
  bool operator==(const Demonstration&) const = default;
};

// Several agents sharing one road; each agent's environment lists only the
// non-agent vehicles, the other agents are obstacles to it through their
// own trajectories.
struct JointScene {
  std::vector<Demonstration> agents;

  int size() const { return static_cast<int>(agents.size()); }
  bool operator==(const JointScene&) const = default;
};

// Throws StructuralError unless the record invariants that do not involve the
// dynamics hold: finite fields, v >= 0 and h in (-pi, pi] on history states,
// speed_limit > 0, dt > 0, obstacle tracks at least as long as the expert,
// nonempty history and matching state/control lengths.
void CheckRecord(const Demonstration& demo);

// Wraps an angle into (-pi, pi].
double WrapAngle(double angle);

}  // namespace ebioc

#endif  // EBIOC_TYPES_H_
