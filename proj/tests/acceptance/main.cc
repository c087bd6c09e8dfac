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

// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any selected criterion fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <set>

#include <CLI11.hpp>

#include "acceptance/acceptance.h"
#include "ebioc/logging.h"

namespace ebioc::acceptance {

std::string Format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list copy;
  va_copy(copy, args);
  const int n = std::vsnprintf(nullptr, 0, fmt, copy);
  va_end(copy);
  std::string out(static_cast<size_t>(n) + 1, '\0');
  std::vsnprintf(out.data(), out.size(), fmt, args);
  va_end(args);
  out.resize(static_cast<size_t>(n));
  return out;
}

const std::vector<Criterion>& AllCriteria() {
  static const std::vector<Criterion> kAll = {
      {1, "gradient fidelity", GradientFidelity},
      {2, "langevin stationarity", LangevinStationarity},
      {3, "ilqr oracle", IlqrOracle},
      {4, "moment matching", MomentMatching},
      {5, "cost recovery ranking", CostRecoveryRanking},
      {6, "inverse dynamics round trip", InverseDynamicsRoundTrip},
      {7, "cooperative training trend", CooperativeTrend},
      {8, "multi-agent reduction", MultiagentReduction},
      {9, "metric correctness", MetricCorrectness},
      {10, "determinism", Determinism},
  };
  return kAll;
}

}  // namespace ebioc::acceptance

int main(int argc, char** argv) {
  using namespace ebioc::acceptance;
  CLI::App app("ebioc acceptance criteria");
  std::vector<int> selected;
  bool verbose = false;
  app.add_option("criteria", selected, "criterion numbers (default: all)")
      ->check(CLI::Range(1, 10));
  app.add_flag("-v,--verbose", verbose, "log training progress");
  CLI11_PARSE(app, argc, argv);
  if (verbose) ebioc::SetLogLevel(ebioc::LogLevel::kInfo);
  const std::set<int> want(selected.begin(), selected.end());

  int failed = 0;
  for (const Criterion& c : AllCriteria()) {
    if (!want.empty() && !want.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("AC%d %s %s: %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL",
                c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
