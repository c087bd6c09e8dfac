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

#include "ebioc/serialization.h"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ebioc/error.h"

namespace ebioc {
namespace {

Json Pair(double a, double b) { return Json::array({a, b}); }
Json StateJson(const State& s) { return Json::array({s.x, s.y, s.v, s.h}); }

const Json& Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw StructuralError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::vector<double> Numbers(const Json& j, size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) {
    throw StructuralError(std::string(what) + " must be an array of " +
                          std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const Json& v : j) {
    if (!v.is_number()) {
      throw StructuralError(std::string(what) + " holds a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

State StateFrom(const Json& j) {
  const auto v = Numbers(j, 4, "state");
  return {v[0], v[1], v[2], v[3]};
}
Control ControlFrom(const Json& j) {
  const auto v = Numbers(j, 2, "control");
  return {v[0], v[1]};
}
Point2 PointFrom(const Json& j) {
  const auto v = Numbers(j, 2, "point");
  return {v[0], v[1]};
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Json ToJson(const Trajectory& traj) {
  Json states = Json::array(), controls = Json::array();
  for (const State& s : traj.states) states.push_back(StateJson(s));
  for (const Control& c : traj.controls.controls) {
    controls.push_back(Pair(c.accel, c.steer));
  }
  return {{"states", states},
          {"controls", controls},
          {"mode", traj.controls.mode == ControlMode::kDelta ? "delta"
                                                             : "absolute"}};
}

Json ToJson(const Environment& e) {
  Json obstacles = Json::array();
  for (const OtherVehicleTrack& t : e.obstacles) {
    Json track = Json::array();
    for (const Point2& p : t.positions) track.push_back(Pair(p.x, p.y));
    obstacles.push_back(track);
  }
  return {{"lane", e.lane},
          {"speed_limit", e.speed_limit},
          {"goal", Pair(e.goal.x, e.goal.y)},
          {"dt", e.dt},
          {"obstacles", obstacles}};
}

Environment EnvironmentFromJson(const Json& env) {
  Environment e;
  const auto lane = Numbers(Field(env, "lane"), 4, "lane");
  for (int i = 0; i < 4; ++i) e.lane[i] = lane[i];
  e.speed_limit = Field(env, "speed_limit").get<double>();
  e.goal = PointFrom(Field(env, "goal"));
  e.dt = Field(env, "dt").get<double>();
  for (const Json& track : Field(env, "obstacles")) {
    OtherVehicleTrack t;
    for (const Json& p : track) t.positions.push_back(PointFrom(p));
    e.obstacles.push_back(std::move(t));
  }
  return e;
}

Json ToJson(const Demonstration& demo) {
  Json history = Json::array();
  for (const HistoryFrame& f : demo.history.frames) {
    history.push_back({{"state", StateJson(f.state)},
                       {"control", Pair(f.control.accel, f.control.steer)}});
  }
  return {{"history", history},
          {"env", ToJson(demo.env)},
          {"expert", ToJson(demo.expert)}};
}

Json ToJson(const JointScene& scene) {
  Json agents = Json::array();
  for (const Demonstration& d : scene.agents) agents.push_back(ToJson(d));
  return {{"agents", agents}};
}

Trajectory TrajectoryFromJson(const Json& j) {
  Trajectory t;
  for (const Json& s : Field(j, "states")) t.states.push_back(StateFrom(s));
  for (const Json& c : Field(j, "controls")) {
    t.controls.controls.push_back(ControlFrom(c));
  }
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "delta") {
      t.controls.mode = ControlMode::kDelta;
    } else if (mode != "absolute") {
      throw StructuralError("unknown control mode '" + mode + "'");
    }
  }
  return t;
}

Demonstration DemonstrationFromJson(const Json& j) {
  Demonstration d;
  for (const Json& f : Field(j, "history")) {
    d.history.frames.push_back(
        {StateFrom(Field(f, "state")), ControlFrom(Field(f, "control"))});
  }
  d.env = EnvironmentFromJson(Field(j, "env"));
  d.expert = TrajectoryFromJson(Field(j, "expert"));
  return d;
}

JointScene JointSceneFromJson(const Json& j) {
  JointScene s;
  for (const Json& a : Field(j, "agents")) {
    s.agents.push_back(DemonstrationFromJson(a));
  }
  return s;
}

Json ToJson(const FeatureNormalizer& n) {
  return {{"divisor", std::vector<double>(n.divisor.data(),
                                          n.divisor.data() + kNumFeatures)},
          {"reference_horizon", n.reference_horizon},
          {"control_mean", Pair(n.control_mean[0], n.control_mean[1])},
          {"control_std", Pair(n.control_std[0], n.control_std[1])}};
}

FeatureNormalizer NormalizerFromJson(const Json& j) {
  FeatureNormalizer n;
  const auto d = Numbers(Field(j, "divisor"), kNumFeatures, "divisor");
  for (int k = 0; k < kNumFeatures; ++k) n.divisor[k] = d[k];
  n.reference_horizon = Field(j, "reference_horizon").get<int>();
  const auto m = Numbers(Field(j, "control_mean"), 2, "control_mean");
  const auto s = Numbers(Field(j, "control_std"), 2, "control_std");
  n.control_mean = {m[0], m[1]};
  n.control_std = {s[0], s[1]};
  return n;
}

std::vector<Json> ReadJsonLines(const std::string& path) {
  std::ifstream in = OpenIn(path);
  std::vector<Json> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw StructuralError(path + ":" + std::to_string(number) + ": " +
                            e.what());
    }
  }
  return out;
}

void WriteJsonLines(const std::string& path, const std::vector<Json>& lines) {
  std::ofstream out = OpenOut(path);
  for (const Json& j : lines) out << j.dump() << '\n';
}

std::vector<Demonstration> ReadDemonstrations(std::istream& in) {
  std::vector<Demonstration> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(DemonstrationFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw StructuralError("line " + std::to_string(number) + ": " + e.what());
    } catch (const StructuralError& e) {
      throw StructuralError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Demonstration> ReadDemonstrations(const std::string& path) {
  std::ifstream in = OpenIn(path);
  return ReadDemonstrations(in);
}

void WriteDemonstrations(std::ostream& out,
                         const std::vector<Demonstration>& demos) {
  for (const Demonstration& d : demos) out << ToJson(d).dump() << '\n';
}

void WriteDemonstrations(const std::string& path,
                         const std::vector<Demonstration>& demos) {
  std::ofstream out = OpenOut(path);
  WriteDemonstrations(out, demos);
}

std::vector<JointScene> ReadJointScenes(const std::string& path) {
  std::vector<JointScene> out;
  for (const Json& j : ReadJsonLines(path)) out.push_back(JointSceneFromJson(j));
  return out;
}

void WriteJointScenes(const std::string& path,
                      const std::vector<JointScene>& scenes) {
  std::ofstream out = OpenOut(path);
  for (const JointScene& s : scenes) out << ToJson(s).dump() << '\n';
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in = OpenIn(path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw StructuralError(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out = OpenOut(path);
  out << j.dump(2) << '\n';
}

Json CostToJson(const CostModel& model) {
  const Eigen::VectorXd& p = model.params();
  return {{"layout", model.Layout()},
          {"params", std::vector<double>(p.data(), p.data() + p.size())},
          {"normalizer", ToJson(model.normalizer())}};
}

std::unique_ptr<CostModel> CostFromJson(const Json& j) {
  const std::vector<double> p = Field(j, "params").get<std::vector<double>>();
  const Eigen::VectorXd params =
      Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
  return CostFromLayout(Field(j, "layout"), params,
                        NormalizerFromJson(Field(j, "normalizer")));
}

std::string ConfigHash(const Json& config) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ebioc
