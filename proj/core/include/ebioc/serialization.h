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

// JSON and JSON Lines serialization of records, normalizers and cost
// checkpoints. Doubles are written in shortest round-trip form, so a
// save/load cycle reproduces every field exactly.
//
// Demonstration line:
//   {"history": [{"state": [x, y, v, h], "control": [a, s]}, ...],
//    "env": {"lane": [c0, c1, c2, c3], "speed_limit": .., "goal": [x, y],
//            "dt": .., "obstacles": [[[x, y], ...], ...]},
//    "expert": {"states": [[x, y, v, h], ...], "controls": [[a, s], ...],
//               "mode": "absolute" | "delta"}}
// Joint scene line: {"agents": [<demonstration>, ...]}

#ifndef EBIOC_SERIALIZATION_H_
#define EBIOC_SERIALIZATION_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ebioc/cost.h"
#include "ebioc/features.h"
#include "ebioc/types.h"

namespace ebioc {

using Json = nlohmann::json;

Json ToJson(const Demonstration& demo);
Json ToJson(const JointScene& scene);
Json ToJson(const Trajectory& traj);
Json ToJson(const Environment& env);
Json ToJson(const FeatureNormalizer& normalizer);

// Parsers throw StructuralError naming the offending field.
Demonstration DemonstrationFromJson(const Json& j);
JointScene JointSceneFromJson(const Json& j);
Trajectory TrajectoryFromJson(const Json& j);
Environment EnvironmentFromJson(const Json& j);
FeatureNormalizer NormalizerFromJson(const Json& j);

// One JSON document per line; blank lines are skipped.
std::vector<Demonstration> ReadDemonstrations(std::istream& in);
std::vector<Demonstration> ReadDemonstrations(const std::string& path);
void WriteDemonstrations(std::ostream& out,
                         const std::vector<Demonstration>& demos);
void WriteDemonstrations(const std::string& path,
                         const std::vector<Demonstration>& demos);

std::vector<JointScene> ReadJointScenes(const std::string& path);
void WriteJointScenes(const std::string& path,
                      const std::vector<JointScene>& scenes);

std::vector<Json> ReadJsonLines(const std::string& path);
void WriteJsonLines(const std::string& path, const std::vector<Json>& lines);
Json ReadJsonFile(const std::string& path);
// Pretty-printed with a trailing newline.
void WriteJsonFile(const std::string& path, const Json& j);

// {"layout": .., "params": [..], "normalizer": {..}}
Json CostToJson(const CostModel& model);
std::unique_ptr<CostModel> CostFromJson(const Json& j);

// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string ConfigHash(const Json& config);

}  // namespace ebioc

#endif  // EBIOC_SERIALIZATION_H_
