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

#ifndef EBIOC_RANDOM_H_
#define EBIOC_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace ebioc {

// One step of the SplitMix64 generator.
uint64_t SplitMix64(uint64_t& state);

// Deterministically derives a substream seed from a base seed, a stream name
// and a path of integer keys (epoch, demonstration index, copy, ...). Used so
// that every chain owns its own RNG regardless of scheduling.
uint64_t DeriveSeed(uint64_t base, std::string_view stream,
                    std::initializer_list<uint64_t> path = {});

// Seeded standard-normal source.
class NormalSource {
 public:
  explicit NormalSource(uint64_t seed) : engine_(seed) {}

  double Next() { return dist_(engine_); }
  Eigen::VectorXd Vector(int n);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace ebioc

#endif  // EBIOC_RANDOM_H_
