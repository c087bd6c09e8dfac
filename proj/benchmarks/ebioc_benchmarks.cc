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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ebioc/cost.h"
#include "ebioc/data.h"
#include "ebioc/ilqr.h"
#include "ebioc/objective.h"
#include "ebioc/sampler.h"
#include "testing/scenes.h"

namespace ebioc {
namespace {

std::unique_ptr<CostModel> BenchCost(CostKind kind, int horizon) {
  CostConfig config;
  config.kind = kind;
  config.conv_channels = {16, 32};
  config.conv_strides = {2, 2};
  return MakeCost(config, FeatureNormalizer{}, horizon, 7);
}

void BM_GradWrtControls(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const auto kind = static_cast<CostKind>(state.range(1));
  const Demonstration demo = testing::RandomScene(1, horizon);
  const auto model = BenchCost(kind, horizon);
  for (auto _ : state) {
    GradReport r = GradWrtControls(*model, demo.expert.controls,
                                   demo.history.initial_state(), demo.env,
                                   demo.history);
    benchmark::DoNotOptimize(r.value);
  }
  state.SetLabel(ToString(kind));
}
BENCHMARK(BM_GradWrtControls)
    ->Args({10, static_cast<int>(CostKind::kLinear)})
    ->Args({40, static_cast<int>(CostKind::kLinear)})
    ->Args({40, static_cast<int>(CostKind::kMlp)})
    ->Args({40, static_cast<int>(CostKind::kConv)});

void BM_LangevinChain(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const Demonstration demo = testing::RandomScene(2, 40);
  const auto model = GroundTruthCost(ThetaStarPreset("lane_keeper"), 40);
  SamplerConfig config;
  config.steps = steps;
  const ControlSequence init = HoldControls(demo.history, 40);
  for (auto _ : state) {
    SolverResult r =
        LangevinSample(*model, init, demo.history.initial_state(), demo.env,
                       demo.history, config);
    benchmark::DoNotOptimize(r.energy.back());
  }
}
BENCHMARK(BM_LangevinChain)->Arg(8)->Arg(64);

void BM_IlqrSolve(benchmark::State& state) {
  const Demonstration demo = testing::RandomScene(3, 40);
  const auto model = GroundTruthCost(ThetaStarPreset("lane_keeper"), 40);
  SamplerConfig config;
  config.kind = SolverKind::kIlqr;
  config.ilqr.max_iter = static_cast<int>(state.range(0));
  const ControlSequence init = HoldControls(demo.history, 40);
  for (auto _ : state) {
    SolverResult r = IlqrSolve(*model, init, demo.history.initial_state(),
                               demo.env, demo.history, config);
    benchmark::DoNotOptimize(r.energy.back());
  }
}
BENCHMARK(BM_IlqrSolve)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ebioc

BENCHMARK_MAIN();
