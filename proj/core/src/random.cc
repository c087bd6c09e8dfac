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

#include "ebioc/random.h"

namespace ebioc {

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t DeriveSeed(uint64_t base, std::string_view stream,
                    std::initializer_list<uint64_t> path) {
  // FNV-1a over the stream name, then SplitMix mixing of each key
  uint64_t name_hash = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    name_hash ^= static_cast<unsigned char>(c);
    name_hash *= 0x100000001b3ULL;
  }
  uint64_t state = base ^ name_hash;
  uint64_t out = SplitMix64(state);
  for (uint64_t key : path) {
    state ^= key + 0x632be59bd9b4e019ULL + (out << 6) + (out >> 2);
    out = SplitMix64(state);
  }
  return out;
}

Eigen::VectorXd NormalSource::Vector(int n) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = dist_(engine_);
  return out;
}

}  // namespace ebioc
