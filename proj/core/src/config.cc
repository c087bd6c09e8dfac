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

#include "ebioc/config.h"

#include <set>

#include "ebioc/error.h"

namespace ebioc {
namespace {

// Reads the keys of one JSON object and records the ones never asked for.
class Section {
 public:
  Section(const Json* j, std::string path, std::vector<std::string>* unknown)
      : j_(j), path_(std::move(path)), unknown_(unknown) {
    if (j_ && !j_->is_object()) {
      throw ConfigError("'" + Name() + "' must be an object");
    }
  }
  Section(const Section&) = delete;
  ~Section() {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!seen_.count(it.key())) unknown_->push_back(Join(it.key()));
    }
  }

  bool Has(const char* key) const { return j_ && j_->contains(key); }

  template <typename T>
  void Get(const char* key, T* out) {
    if (!Has(key)) return;
    seen_.insert(key);
    try {
      *out = j_->at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError("'" + Join(key) + "' has the wrong type");
    }
  }

  void GetOptional(const char* key, std::optional<double>* out) {
    if (!Has(key)) return;
    double v = 0.0;
    Get(key, &v);
    *out = v;
  }

  void GetRange(const char* key, Range* out) {
    if (!Has(key)) return;
    std::vector<double> v;
    Get(key, &v);
    if (v.size() != 2) throw ConfigError("'" + Join(key) + "' must be [lo, hi]");
    *out = {v[0], v[1]};
  }

  template <typename E>
  void GetEnum(const char* key, E* out, E (*parse)(const std::string&)) {
    if (!Has(key)) return;
    std::string name;
    Get(key, &name);
    try {
      *out = parse(name);
    } catch (const Error& e) {
      throw ConfigError("'" + Join(key) + "': " + e.what());
    }
  }

  // Sub-object; absent keys give an empty reader.
  Section Sub(const char* key) {
    if (!Has(key)) return Section(nullptr, Join(key), unknown_);
    seen_.insert(key);
    return Section(&j_->at(key), Join(key), unknown_);
  }

  Section(Section&& other) noexcept
      : j_(other.j_),
        path_(std::move(other.path_)),
        unknown_(other.unknown_),
        seen_(std::move(other.seen_)) {
    other.j_ = nullptr;
  }

 private:
  std::string Name() const { return path_.empty() ? "<root>" : path_; }
  std::string Join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* j_;
  std::string path_;
  std::vector<std::string>* unknown_;
  std::set<std::string> seen_;
};

void ReadIlqr(Section s, IlqrConfig* c) {
  s.Get("lr_min", &c->lr_min);
  s.Get("lr_max", &c->lr_max);
  s.Get("lr_count", &c->lr_count);
  s.Get("max_iter", &c->max_iter);
  s.Get("early_stop", &c->early_stop);
  s.Get("mu_min", &c->mu_min);
  s.Get("mu_max", &c->mu_max);
}

Json IlqrJson(const IlqrConfig& c) {
  return {{"lr_min", c.lr_min},         {"lr_max", c.lr_max},
          {"lr_count", c.lr_count},     {"max_iter", c.max_iter},
          {"early_stop", c.early_stop}, {"mu_min", c.mu_min},
          {"mu_max", c.mu_max}};
}

void ReadSampler(Section s, SamplerConfig* c) {
  s.GetEnum("kind", &c->kind, &SolverKindFromString);
  s.Get("steps", &c->steps);
  s.Get("step_size", &c->step_size);
  s.Get("clamp", &c->clamp);
  s.Get("noise_scale", &c->noise_scale);
  s.Get("backtracking", &c->backtracking);
  s.Get("max_halvings", &c->max_halvings);
  s.Get("record_iterates", &c->record_iterates);
  ReadIlqr(s.Sub("ilqr"), &c->ilqr);
}

void ReadScenario(Section s, ScenarioSpec* c) {
  s.Get("count", &c->count);
  s.Get("horizon", &c->horizon);
  s.Get("dt", &c->dt);
  s.Get("history", &c->history);
  s.GetRange("lane_c0", &c->lane_c0);
  s.GetRange("lane_c1", &c->lane_c1);
  s.GetRange("lane_c2", &c->lane_c2);
  s.GetRange("lane_c3", &c->lane_c3);
  s.GetRange("speed", &c->speed);
  s.GetRange("speed_limit", &c->speed_limit);
  s.GetRange("lateral_offset", &c->lateral_offset);
  s.GetRange("heading_offset", &c->heading_offset);
  s.GetRange("warmup_accel", &c->warmup_accel);
  s.GetRange("warmup_steer", &c->warmup_steer);
  s.GetRange("goal_distance", &c->goal_distance);
  s.Get("min_obstacles", &c->min_obstacles);
  s.Get("max_obstacles", &c->max_obstacles);
  s.GetRange("obstacle_gap", &c->obstacle_gap);
  s.GetRange("obstacle_speed", &c->obstacle_speed);
  s.Get("lane_width", &c->lane_width);
  s.Get("min_clearance", &c->min_clearance);
  s.Get("max_retries", &c->max_retries);
  s.Get("agents", &c->agents);
  s.Get("agent_spacing", &c->agent_spacing);
}

Json RangeJson(const Range& r) { return Json::array({r.lo, r.hi}); }

void Check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string ToString(InitMode mode) {
  return mode == InitMode::kGenerator ? "generator" : "zeros";
}

InitMode InitModeFromString(const std::string& name) {
  if (name == "zeros") return InitMode::kZeros;
  if (name == "generator") return InitMode::kGenerator;
  throw ConfigError("unknown init mode '" + name + "'");
}

ScenarioSpec ScenarioSpecFromJson(const Json& j) {
  std::vector<std::string> unknown;
  ScenarioSpec spec;
  {
    Section s(&j, "", &unknown);
    ReadScenario(std::move(s), &spec);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown scenario keys: " + list);
  }
  Validate(spec);
  return spec;
}

Json ToJson(const ScenarioSpec& c) {
  return {{"count", c.count},
          {"horizon", c.horizon},
          {"dt", c.dt},
          {"history", c.history},
          {"lane_c0", RangeJson(c.lane_c0)},
          {"lane_c1", RangeJson(c.lane_c1)},
          {"lane_c2", RangeJson(c.lane_c2)},
          {"lane_c3", RangeJson(c.lane_c3)},
          {"speed", RangeJson(c.speed)},
          {"speed_limit", RangeJson(c.speed_limit)},
          {"lateral_offset", RangeJson(c.lateral_offset)},
          {"heading_offset", RangeJson(c.heading_offset)},
          {"warmup_accel", RangeJson(c.warmup_accel)},
          {"warmup_steer", RangeJson(c.warmup_steer)},
          {"goal_distance", RangeJson(c.goal_distance)},
          {"min_obstacles", c.min_obstacles},
          {"max_obstacles", c.max_obstacles},
          {"obstacle_gap", RangeJson(c.obstacle_gap)},
          {"obstacle_speed", RangeJson(c.obstacle_speed)},
          {"lane_width", c.lane_width},
          {"min_clearance", c.min_clearance},
          {"max_retries", c.max_retries},
          {"agents", c.agents},
          {"agent_spacing", c.agent_spacing}};
}

SamplerConfig SamplerConfigFromJson(const Json& j) {
  std::vector<std::string> unknown;
  SamplerConfig c;
  ReadSampler(Section(&j, "", &unknown), &c);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown sampler keys: " + list);
  }
  Validate(c);
  return c;
}

Json ToJson(const SamplerConfig& c) {
  return {{"kind", ToString(c.kind)},
          {"steps", c.steps},
          {"step_size", c.step_size},
          {"clamp", c.clamp},
          {"noise_scale", c.noise_scale},
          {"backtracking", c.backtracking},
          {"max_halvings", c.max_halvings},
          {"record_iterates", c.record_iterates},
          {"ilqr", IlqrJson(c.ilqr)}};
}

AppConfig ConfigFromJson(const Json& j) {
  AppConfig c;
  std::vector<std::string> unknown;
  {
    Section root(&j, "", &unknown);
    root.Get("seed", &c.seed);
    root.Get("workers", &c.workers);
    ReadScenario(root.Sub("scenario"), &c.scenario);
    {
      Section s = root.Sub("expert");
      ReadSampler(s.Sub("solver"), &c.expert.solver);
      s.Get("jitter_steps", &c.expert.jitter_steps);
      s.Get("jitter_step_size", &c.expert.jitter_step_size);
    }
    {
      Section s = root.Sub("dynamics");
      s.GetEnum("model", &c.dynamics.model, &DynamicsModelFromString);
      s.Get("wheelbase", &c.dynamics.wheelbase);
      s.Get("dt", &c.dynamics.dt);
    }
    {
      Section s = root.Sub("features");
      s.Get("obstacle_cap", &c.features.obstacle_cap);
      s.Get("softmin_temperature", &c.features.softmin_temperature);
      s.Get("overspeed_weight", &c.features.overspeed_weight);
      s.Get("speed_deviation_weight", &c.features.speed_deviation_weight);
      s.Get("distance_epsilon", &c.features.distance_epsilon);
    }
    {
      Section s = root.Sub("limits");
      s.Get("accel_max", &c.limits.accel_max);
      s.Get("steer_max", &c.limits.steer_max);
    }
    {
      Section s = root.Sub("cost");
      s.GetEnum("kind", &c.cost.kind, &CostKindFromString);
      s.Get("linear_init", &c.cost.linear_init);
      s.Get("mlp_hidden", &c.cost.mlp_hidden);
      s.Get("leaky_slope", &c.cost.leaky_slope);
      s.Get("conv_channels", &c.cost.conv_channels);
      s.Get("conv_strides", &c.cost.conv_strides);
      s.Get("conv_kernel", &c.cost.conv_kernel);
    }
    ReadSampler(root.Sub("sampler"), &c.sampler);
    {
      Section s = root.Sub("train");
      s.Get("batch_size", &c.train.batch_size);
      s.Get("epochs", &c.train.epochs);
      s.Get("samples_per_demo", &c.train.samples_per_demo);
      s.GetOptional("learning_rate", &c.train.learning_rate);
      s.GetOptional("lr_decay", &c.train.lr_decay);
      s.Get("beta1", &c.train.beta1);
      s.Get("beta2", &c.train.beta2);
      s.Get("epsilon", &c.train.epsilon);
      s.GetEnum("schedule", &c.train.schedule, &LrScheduleFromString);
      s.Get("split_ratio", &c.train.split_ratio);
    }
    {
      Section s = root.Sub("generator");
      s.Get("hidden", &c.generator.hidden);
      s.Get("learning_rate", &c.generator.learning_rate);
      s.Get("lr_decay", &c.generator.lr_decay);
      s.Get("updates_per_batch", &c.generator.updates_per_batch);
      s.Get("use_adam", &c.generator.use_adam);
      s.Get("update", &c.generator.update);
    }
    {
      Section s = root.Sub("eval");
      s.Get("horizons", &c.eval.horizons);
      s.Get("samples", &c.eval.samples);
      s.Get("radius", &c.eval.radius);
      s.GetEnum("init", &c.eval.init, &InitModeFromString);
    }
    {
      Section s = root.Sub("corner");
      s.Get("safety_gap", &c.corner.safety_gap);
      s.Get("max_lane_deviation", &c.corner.max_lane_deviation);
    }
    {
      Section s = root.Sub("ingest");
      s.Get("max_rmse", &c.ingest.max_rmse);
      s.Get("initial_fit_points", &c.ingest.initial_fit_points);
      Section in = s.Sub("infer");
      in.Get("iters", &c.ingest.infer.iters);
      in.Get("learning_rate", &c.ingest.infer.learning_rate);
      in.Get("clamp", &c.ingest.infer.clamp);
      in.Get("finite_difference_init", &c.ingest.infer.finite_difference_init);
      std::vector<double> scale;
      in.Get("control_scale", &scale);
      if (!scale.empty()) {
        Check(scale.size() == 2, "'ingest.infer.control_scale' needs 2 values");
        c.ingest.infer.control_scale = {scale[0], scale[1]};
      }
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown configuration keys: " + list);
  }

  Check(c.workers >= 1, "workers must be >= 1");
  Check(c.limits.accel_max > 0.0 && c.limits.steer_max > 0.0,
        "control limits must be positive");
  Check(c.dynamics.dt > 0.0 && c.dynamics.wheelbase > 0.0,
        "dynamics dt and wheelbase must be positive");
  Check(c.train.split_ratio > 0.0 && c.train.split_ratio < 1.0,
        "train.split_ratio must lie strictly between 0 and 1");
  Check(c.eval.samples >= 1, "eval.samples must be >= 1");
  Check(!c.eval.horizons.empty(), "eval.horizons must not be empty");
  Check(c.eval.radius > 0.0, "eval.radius must be positive");
  Check(c.expert.jitter_steps >= 0, "expert.jitter_steps must be >= 0");
  Check(c.ingest.max_rmse > 0.0, "ingest.max_rmse must be positive");
  Check(c.cost.linear_init == "normal" || c.cost.linear_init == "zeros",
        "cost.linear_init must be 'normal' or 'zeros'");
  Validate(c.scenario);
  Validate(c.sampler);
  Validate(c.expert.solver);
  Validate(c.generator);
  Validate(c.MakeTrainConfig());
  return c;
}

AppConfig LoadConfig(const std::string& path) {
  return ConfigFromJson(ReadJsonFile(path));
}

TrainConfig AppConfig::MakeTrainConfig() const {
  TrainConfig t = DefaultTrainConfig(cost.kind);
  t.batch_size = train.batch_size;
  t.epochs = train.epochs;
  t.samples_per_demo = train.samples_per_demo;
  if (train.learning_rate) t.adam.learning_rate = *train.learning_rate;
  if (train.lr_decay) t.lr_decay = *train.lr_decay;
  t.adam.beta1 = train.beta1;
  t.adam.beta2 = train.beta2;
  t.adam.epsilon = train.epsilon;
  t.schedule = train.schedule;
  t.sampler = sampler;
  t.seed = seed;
  t.workers = workers;
  t.dynamics = dynamics;
  t.features = features;
  t.limits = limits;
  return t;
}

ExpertConfig AppConfig::MakeExpertConfig() const {
  ExpertConfig e = expert;
  e.dynamics = dynamics;
  e.features = features;
  e.limits = limits;
  e.workers = workers;
  return e;
}

Json ToJson(const AppConfig& c) {
  const TrainConfig resolved = c.MakeTrainConfig();
  return {
      {"seed", c.seed},
      {"workers", c.workers},
      {"scenario", ToJson(c.scenario)},
      {"expert",
       {{"solver", ToJson(c.expert.solver)},
        {"jitter_steps", c.expert.jitter_steps},
        {"jitter_step_size", c.expert.jitter_step_size}}},
      {"dynamics",
       {{"model", ToString(c.dynamics.model)},
        {"wheelbase", c.dynamics.wheelbase},
        {"dt", c.dynamics.dt}}},
      {"features",
       {{"obstacle_cap", c.features.obstacle_cap},
        {"softmin_temperature", c.features.softmin_temperature},
        {"overspeed_weight", c.features.overspeed_weight},
        {"speed_deviation_weight", c.features.speed_deviation_weight},
        {"distance_epsilon", c.features.distance_epsilon}}},
      {"limits",
       {{"accel_max", c.limits.accel_max}, {"steer_max", c.limits.steer_max}}},
      {"cost",
       {{"kind", ToString(c.cost.kind)},
        {"linear_init", c.cost.linear_init},
        {"mlp_hidden", c.cost.mlp_hidden},
        {"leaky_slope", c.cost.leaky_slope},
        {"conv_channels", c.cost.conv_channels},
        {"conv_strides", c.cost.conv_strides},
        {"conv_kernel", c.cost.conv_kernel}}},
      {"sampler", ToJson(c.sampler)},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"epochs", c.train.epochs},
        {"samples_per_demo", c.train.samples_per_demo},
        {"learning_rate", resolved.adam.learning_rate},
        {"lr_decay", resolved.lr_decay},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon},
        {"schedule", ToString(c.train.schedule)},
        {"split_ratio", c.train.split_ratio}}},
      {"generator",
       {{"hidden", c.generator.hidden},
        {"learning_rate", c.generator.learning_rate},
        {"lr_decay", c.generator.lr_decay},
        {"updates_per_batch", c.generator.updates_per_batch},
        {"use_adam", c.generator.use_adam},
        {"update", c.generator.update}}},
      {"eval",
       {{"horizons", c.eval.horizons},
        {"samples", c.eval.samples},
        {"radius", c.eval.radius},
        {"init", ToString(c.eval.init)}}},
      {"corner",
       {{"safety_gap", c.corner.safety_gap},
        {"max_lane_deviation", c.corner.max_lane_deviation}}},
      {"ingest",
       {{"max_rmse", c.ingest.max_rmse},
        {"initial_fit_points", c.ingest.initial_fit_points},
        {"infer",
         {{"iters", c.ingest.infer.iters},
          {"learning_rate", c.ingest.infer.learning_rate},
          {"clamp", c.ingest.infer.clamp},
          {"finite_difference_init", c.ingest.infer.finite_difference_init},
          {"control_scale",
           {c.ingest.infer.control_scale[0], c.ingest.infer.control_scale[1]}}}}}}};
}

}  // namespace ebioc
