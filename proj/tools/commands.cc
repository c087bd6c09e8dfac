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

#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ebioc/data.h"
#include "ebioc/error.h"
#include "ebioc/eval.h"
#include "ebioc/learning.h"
#include "ebioc/multiagent.h"
#include "ebioc/random.h"

namespace ebioc::tools {
namespace {

constexpr const char* kCheckpointFormat = "ebioc.checkpoint";
constexpr int kCheckpointVersion = 1;

bool OnOff(const std::string& flag, const char* name) {
  if (flag == "on") return true;
  if (flag == "off") return false;
  throw ConfigError(std::string("--") + name + " must be 'on' or 'off'");
}

void ApplyGlobals(const GlobalOptions& global, AppConfig* config) {
  if (global.seed) config->seed = *global.seed;
  if (global.workers) config->workers = *global.workers;
  if (config->workers < 1) throw ConfigError("workers must be >= 1");
}

// Config for commands that consume a checkpoint: an explicit --config wins,
// otherwise the configuration the checkpoint was trained with.
AppConfig ConfigFor(const GlobalOptions& global, const Checkpoint& ckpt) {
  AppConfig config = global.config_path.empty() ? ConfigFromJson(ckpt.config)
                                                : LoadConfig(global.config_path);
  ApplyGlobals(global, &config);
  return config;
}

// Sidecar metadata for JSONL outputs, whose lines are plain records.
void WriteMeta(const std::string& out, const std::string& command,
               const AppConfig& config) {
  const Json echo = ConfigEcho(config);
  WriteJsonFile(out + ".meta.json", {{"command", command},
                                     {"config", echo},
                                     {"config_hash", ConfigHash(echo)}});
}

Json WithConfig(Json report, const AppConfig& config) {
  const Json echo = ConfigEcho(config);
  report["config"] = echo;
  report["config_hash"] = ConfigHash(echo);
  return report;
}

FeatureVector ReadThetaStar(const std::string& spec) {
  const std::vector<std::string> presets = ThetaStarPresets();
  if (std::find(presets.begin(), presets.end(), spec) != presets.end()) {
    return ThetaStarPreset(spec);
  }
  std::ifstream probe(spec);
  if (!probe) {
    std::string names;
    for (const auto& p : presets) names += (names.empty() ? "" : ", ") + p;
    throw ConfigError("--theta-star '" + spec +
                      "' is neither a preset (" + names + ") nor a file");
  }
  Json j = ReadJsonFile(spec);
  if (j.is_object()) {
    if (!j.contains("theta") || j.size() != 1) {
      throw ConfigError("theta file must be an array or {\"theta\": [...]}");
    }
    j = j.at("theta");
  }
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const Json::exception&) {
    throw ConfigError("theta must be an array of numbers");
  }
  if (static_cast<int>(v.size()) != kNumFeatures) {
    throw ConfigError("theta needs " + std::to_string(kNumFeatures) +
                      " weights, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const FeatureVector>(v.data());
}

bool IsJointLine(const Json& j) { return j.is_object() && j.contains("agents"); }

// Demonstrations from a dataset file; joint scenes are flattened with the
// other agents' expert tracks as obstacles.
std::vector<Demonstration> LoadDemos(const std::string& path) {
  const std::vector<Json> lines = ReadJsonLines(path);
  std::vector<Demonstration> demos;
  std::vector<JointScene> scenes;
  for (const Json& j : lines) {
    if (IsJointLine(j)) {
      scenes.push_back(JointSceneFromJson(j));
    } else {
      demos.push_back(DemonstrationFromJson(j));
    }
  }
  if (!scenes.empty()) {
    if (!demos.empty()) {
      throw StructuralError(path + " mixes joint scenes and demonstrations");
    }
    return FlattenScenes(scenes);
  }
  return demos;
}

std::vector<JointScene> LoadScenes(const std::string& path, bool joint) {
  if (!joint) return AsSingleAgentScenes(LoadDemos(path));
  std::vector<JointScene> scenes;
  for (const Json& j : ReadJsonLines(path)) {
    scenes.push_back(IsJointLine(j) ? JointSceneFromJson(j)
                                    : JointScene{{DemonstrationFromJson(j)}});
  }
  return scenes;
}

void CheckSolverCost(SolverKind solver, CostKind cost, bool multiagent) {
  if (solver != SolverKind::kIlqr) return;
  if (cost == CostKind::kConv) {
    throw UnsupportedError(
        "iLQR needs a per-frame cost; it cannot be combined with the cnn cost");
  }
  if (multiagent) {
    throw UnsupportedError("iLQR does not support multi-agent training");
  }
}

double MaxAbs(const FeatureVector& v) { return v.cwiseAbs().maxCoeff(); }

SampleSets SamplesFromLines(const std::vector<Json>& lines) {
  SampleSets out;
  for (const Json& j : lines) {
    std::vector<Trajectory> set;
    if (j.is_object() && j.contains("samples")) {
      for (const Json& t : j.at("samples")) set.push_back(TrajectoryFromJson(t));
    } else if (IsJointLine(j)) {
      for (const Demonstration& d : JointSceneFromJson(j).agents) {
        out.push_back({d.expert});
      }
      continue;
    } else {
      set.push_back(DemonstrationFromJson(j).expert);
    }
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<Trajectory> Experts(const std::vector<Demonstration>& demos) {
  std::vector<Trajectory> out;
  out.reserve(demos.size());
  for (const Demonstration& d : demos) out.push_back(d.expert);
  return out;
}

double CommonDt(const std::vector<Demonstration>& demos) {
  if (demos.empty()) throw StructuralError("ground truth file is empty");
  const double dt = demos.front().env.dt;
  for (const Demonstration& d : demos) {
    if (d.env.dt != dt) throw StructuralError("ground truths mix time steps");
  }
  return dt;
}

PredictOptions PredictFor(const AppConfig& config, int samples,
                          const PolicyGenerator* generator) {
  PredictOptions p;
  p.solver = config.sampler;
  p.solver.seed = DeriveSeed(config.seed, "sample");
  p.samples = samples;
  p.generator = generator;
  p.dynamics = config.dynamics;
  p.features = config.features;
  p.limits = config.limits;
  p.workers = config.workers;
  return p;
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

AppConfig ResolveConfig(const GlobalOptions& global) {
  AppConfig config =
      global.config_path.empty() ? AppConfig{} : LoadConfig(global.config_path);
  ApplyGlobals(global, &config);
  return config;
}

Json ConfigEcho(const AppConfig& config) {
  Json echo = ToJson(config);
  echo.erase("workers");
  return echo;
}

Json CheckpointToJson(const CostModel& cost, const PolicyGenerator* generator,
                      const AppConfig& config) {
  const Json echo = ConfigEcho(config);
  Json j = {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"cost", CostToJson(cost)},
            {"config", echo},
            {"config_hash", ConfigHash(echo)}};
  if (generator) j["generator"] = ToJson(*generator);
  return j;
}

Checkpoint ReadCheckpoint(const std::string& path) {
  const Json j = ReadJsonFile(path);
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw StructuralError(path + " is not an ebioc checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw StructuralError(path + ": unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.cost = CostFromJson(j.at("cost"));
  if (j.contains("generator")) ckpt.generator = GeneratorFromJson(j.at("generator"));
  ckpt.config = j.at("config");
  return ckpt;
}

std::vector<double> ParseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ConfigError("cannot parse '" + item + "' as a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

int GenData(const GlobalOptions& global, const GenDataOptions& opts) {
  AppConfig config = ResolveConfig(global);
  if (!opts.spec_path.empty()) {
    config.scenario = ScenarioSpecFromJson(ReadJsonFile(opts.spec_path));
  }
  const FeatureVector theta = ReadThetaStar(opts.theta_star);
  const ScenarioSpec& spec = config.scenario;
  const auto truth = GroundTruthCost(theta, spec.horizon);
  const ExpertConfig expert = config.MakeExpertConfig();
  const uint64_t data_seed = DeriveSeed(config.seed, "data");
  const uint64_t expert_seed = DeriveSeed(config.seed, "expert");
  size_t written = 0;
  if (spec.agents > 1) {
    const auto scenes = GenExpertScenes(GenJointScenarios(spec, data_seed),
                                        *truth, expert, expert_seed);
    WriteJointScenes(opts.out, scenes);
    written = scenes.size();
  } else {
    const auto demos = GenExpertDemos(GenScenarios(spec, data_seed), *truth,
                                      expert, expert_seed);
    WriteDemonstrations(opts.out, demos);
    written = demos.size();
  }
  Json meta_config = ConfigEcho(config);
  WriteJsonFile(opts.out + ".meta.json",
                {{"command", "gen-data"},
                 {"theta_star", std::vector<double>(theta.data(),
                                                    theta.data() + theta.size())},
                 {"config", meta_config},
                 {"config_hash", ConfigHash(meta_config)}});
  std::fprintf(stderr, "gen-data: wrote %zu of %d scenes to %s\n", written,
               spec.count, opts.out.c_str());
  return 0;
}

int SplitData(const GlobalOptions& global, const SplitOptions& opts) {
  const AppConfig config = ResolveConfig(global);
  const double ratio = opts.ratio.value_or(config.train.split_ratio);
  const std::vector<Json> lines = ReadJsonLines(opts.data);
  const auto [train, test] = Split(lines, ratio, DeriveSeed(config.seed, "split"));
  WriteJsonLines(opts.train_out, train);
  WriteJsonLines(opts.test_out, test);
  std::fprintf(stderr, "split: %zu train, %zu test\n", train.size(),
               test.size());
  return 0;
}

int InferControls(const GlobalOptions& global, const InferOptionsCli& opts) {
  const AppConfig config = ResolveConfig(global);
  IngestOptions ingest = config.ingest;
  ingest.dynamics = config.dynamics;
  const IngestReport report = IngestTracks(ReadTracks(opts.tracks), ingest);
  WriteDemonstrations(opts.out, report.dataset);
  WriteMeta(opts.out, "infer-controls", config);
  if (!opts.report.empty()) {
    Json rejected = Json::array();
    for (const IngestRejection& r : report.rejected) {
      rejected.push_back({{"index", r.index}, {"rmse", r.rmse}, {"reason", r.reason}});
    }
    WriteJsonFile(opts.report, WithConfig({{"accepted", report.dataset.size()},
                                           {"fit_rmse", report.rmse},
                                           {"rejected", rejected}},
                                          config));
  }
  double mean = 0.0;
  for (double r : report.rmse) mean += r;
  if (!report.rmse.empty()) mean /= static_cast<double>(report.rmse.size());
  std::fprintf(stderr,
               "infer-controls: %zu accepted, %zu rejected, mean fit RMSE %s m\n",
               report.dataset.size(), report.rejected.size(),
               Fixed(mean).c_str());
  for (const IngestRejection& r : report.rejected) {
    std::fprintf(stderr, "  track %d rejected: %s\n", r.index, r.reason.c_str());
  }
  return 0;
}

int Train(const GlobalOptions& global, const TrainOptions& opts) {
  AppConfig config = ResolveConfig(global);
  if (opts.cost) config.cost.kind = CostKindFromString(*opts.cost);
  if (opts.solver) config.sampler.kind = SolverKindFromString(*opts.solver);
  const bool coop = OnOff(opts.coop, "coop");
  const bool joint = OnOff(opts.multiagent, "multiagent");
  CheckSolverCost(config.sampler.kind, config.cost.kind, joint);
  const TrainConfig train = config.MakeTrainConfig();
  Validate(train);
  if (coop) Validate(config.generator);

  const std::vector<JointScene> scenes = LoadScenes(opts.data, joint);
  if (scenes.empty()) throw StructuralError(opts.data + " holds no scenes");
  const FeatureNormalizer norm =
      FitNormalizer(FlattenScenes(scenes), config.features);
  std::unique_ptr<CostModel> model = MakeCost(
      config.cost, norm, norm.reference_horizon, DeriveSeed(config.seed, "init"));

  const auto start = std::chrono::steady_clock::now();
  TrainTrace trace;
  std::optional<PolicyGenerator> gen;
  if (coop) {
    gen.emplace(config.generator, config.limits, config.dynamics);
    gen->Initialize(DeriveSeed(config.seed, "generator"));
    CoopTrace ct = TrainCooperative(scenes, *model, *gen, {train, config.generator});
    trace = std::move(ct.train);
    if (!ct.generator_loss.empty()) {
      std::fprintf(stderr, "train: final generator loss %s\n",
                   Fixed(ct.generator_loss.back()).c_str());
    }
  } else {
    trace = TrainScenes(scenes, *model, train);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  WriteJsonFile(opts.out, CheckpointToJson(*model, gen ? &*gen : nullptr, config));
  if (!opts.log.empty()) WriteTrainLog(opts.log, trace);
  std::fprintf(stderr, "train: %s cost, %s solver, %zu scenes, %d epochs in %.1f s\n",
               ToString(config.cost.kind).c_str(),
               ToString(config.sampler.kind).c_str(), scenes.size(),
               train.epochs, seconds);
  if (!trace.epochs.empty()) {
    const EpochRecord& last = trace.epochs.back();
    std::fprintf(stderr,
                 "train: last epoch max |moment gap| %s, energy gap %s, "
                 "rmse avg %s m\n",
                 Fixed(MaxAbs(last.moment_gap)).c_str(),
                 Fixed(last.energy_gap).c_str(), Fixed(last.rmse_avg).c_str());
  }
  return 0;
}

int Sample(const GlobalOptions& global, const SampleOptions& opts) {
  const Checkpoint ckpt = ReadCheckpoint(opts.ckpt);
  const AppConfig config = ConfigFor(global, ckpt);
  const int samples = opts.samples.value_or(config.eval.samples);
  const InitMode init =
      opts.init ? InitModeFromString(*opts.init) : config.eval.init;
  if (init == InitMode::kGenerator && !ckpt.generator) {
    throw ConfigError("generator initialization needs a checkpoint trained "
                      "with --coop on");
  }
  CheckSolverCost(config.sampler.kind, ckpt.cost->kind(), false);
  const std::vector<Demonstration> demos = LoadDemos(opts.data);
  const SampleSets sets = Predict(
      *ckpt.cost, demos,
      PredictFor(config, samples,
                 init == InitMode::kGenerator ? &*ckpt.generator : nullptr));
  std::vector<Json> lines;
  lines.reserve(sets.size());
  for (size_t i = 0; i < sets.size(); ++i) {
    Json s = Json::array();
    for (const Trajectory& t : sets[i]) s.push_back(ToJson(t));
    lines.push_back({{"index", i}, {"samples", s}});
  }
  WriteJsonLines(opts.out, lines);
  WriteMeta(opts.out, "sample", config);
  const OverallRmsePair overall = OverallAvgMin(sets, Experts(demos));
  std::fprintf(stderr,
               "sample: %zu demos x %d samples (%s init), overall RMSE "
               "avg %s m, min %s m\n",
               demos.size(), samples, ToString(init).c_str(),
               Fixed(overall.avg).c_str(), Fixed(overall.min).c_str());
  return 0;
}

int Eval(const GlobalOptions& global, const EvalOptions& opts) {
  const AppConfig config = ResolveConfig(global);
  const std::vector<double> horizons =
      opts.horizons.empty() ? config.eval.horizons : ParseList(opts.horizons);
  const SampleSets sets = SamplesFromLines(ReadJsonLines(opts.pred));
  const std::vector<Demonstration> gt = LoadDemos(opts.gt);
  const std::vector<Trajectory> gts = Experts(gt);
  const RmseReport report =
      AvgMinRmse(sets, gts, horizons, CommonDt(gt), config.eval.radius);
  const OverallRmsePair overall = OverallAvgMin(sets, gts);
  Json j = ToJson(report);
  j["overall"] = {{"avg_rmse", overall.avg}, {"min_rmse", overall.min}};
  WriteJsonFile(opts.report, WithConfig(std::move(j), config));
  if (!opts.csv.empty()) {
    std::ofstream out(opts.csv);
    if (!out) throw StructuralError("cannot write " + opts.csv);
    WriteRmseCsv(out, report);
  }
  std::fprintf(stderr, "eval: %d demos, %d samples each, missing rate %s\n",
               report.num_demos, report.num_samples,
               Fixed(report.missing_rate).c_str());
  for (size_t h = 0; h < report.horizons.size(); ++h) {
    std::fprintf(stderr, "  %.1f s  avg %s m  min %s m\n", report.horizons[h],
                 Fixed(report.avg[h]).c_str(), Fixed(report.min[h]).c_str());
  }
  return 0;
}

int Corner(const GlobalOptions& global, const CornerOptions& opts) {
  const Checkpoint ckpt = ReadCheckpoint(opts.ckpt);
  const AppConfig config = ConfigFor(global, ckpt);
  SamplerConfig solver = config.sampler;
  solver.seed = DeriveSeed(config.seed, "corner");
  const CornerReport report =
      CornerSuite(*ckpt.cost, solver, config.corner, config.dynamics,
                  config.features, config.limits, config.workers);
  WriteJsonFile(opts.report, WithConfig(ToJson(report), config));
  if (!opts.trace.empty()) {
    std::ofstream out(opts.trace);
    if (!out) throw StructuralError("cannot write " + opts.trace);
    WriteControlTraceCsv(out, report);
  }
  std::fprintf(stderr, "corner: %d of %zu scenes passed\n", report.passed,
               report.scenes.size());
  for (const CornerResult& r : report.scenes) {
    std::fprintf(stderr, "  %-20s %s%s\n", r.name.c_str(),
                 r.passed ? "pass" : "FAIL",
                 r.solver_failed ? (" (" + r.error + ")").c_str() : "");
  }
  return 0;
}

int Ablate(const GlobalOptions& global, const AblateOptions& opts) {
  const AppConfig base = ResolveConfig(global);
  if (opts.sweep != "steps" && opts.sweep != "stepsize") {
    throw ConfigError("--sweep must be 'steps' or 'stepsize'");
  }
  const std::vector<double> values = ParseList(opts.values);
  std::vector<Demonstration> train;
  std::vector<Demonstration> test;
  if (opts.test.empty()) {
    std::tie(train, test) = Split(LoadDemos(opts.data), base.train.split_ratio,
                                  DeriveSeed(base.seed, "split"));
  } else {
    train = LoadDemos(opts.data);
    test = LoadDemos(opts.test);
  }
  if (train.empty() || test.empty()) {
    throw StructuralError("ablation needs nonempty train and test sets");
  }
  CheckSolverCost(base.sampler.kind, base.cost.kind, false);
  const std::vector<Trajectory> gts = Experts(test);
  const double dt = CommonDt(test);

  std::ofstream out(opts.out);
  if (!out) throw StructuralError("cannot write " + opts.out);
  out << "sweep,value,horizon,avg_rmse,min_rmse,missing_rate\n";
  for (double value : values) {
    AppConfig config = base;
    if (opts.sweep == "steps") {
      if (value < 1.0 || value != std::floor(value)) {
        throw ConfigError("step counts must be positive integers");
      }
      config.sampler.steps = static_cast<int>(value);
    } else {
      config.sampler.step_size = value;
    }
    const TrainResult result =
        TrainEbm(train, config.cost, config.MakeTrainConfig());
    const SampleSets sets =
        Predict(*result.model, test, PredictFor(config, config.eval.samples, nullptr));
    const RmseReport r =
        AvgMinRmse(sets, gts, config.eval.horizons, dt, config.eval.radius);
    for (size_t h = 0; h < r.horizons.size(); ++h) {
      out << opts.sweep << ',' << Json(value).dump() << ','
          << Json(r.horizons[h]).dump() << ',' << Json(r.avg[h]).dump() << ','
          << Json(r.min[h]).dump() << ',' << Json(r.missing_rate).dump()
          << '\n';
    }
    std::fprintf(stderr, "ablate: %s=%g  final-horizon avg %s m, min %s m\n",
                 opts.sweep.c_str(), value, Fixed(r.avg.back()).c_str(),
                 Fixed(r.min.back()).c_str());
  }
  WriteMeta(opts.out, "ablate", base);
  return 0;
}

}  // namespace ebioc::tools
