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

#include "ebioc/generator.h"

#include <cmath>
#include <cstring>
#include <functional>

#include "ebioc/error.h"
#include "ebioc/objective.h"
#include "ebioc/parallel.h"
#include "ebioc/random.h"

namespace ebioc {
namespace {

// Fixed input scaling: positions relative to x_0 in units of 50 m
// longitudinally and 5 m laterally, speed in 20 m/s, controls relative to
// their bounds.
constexpr double kLonScale = 1.0 / 50.0;
constexpr double kLatScale = 1.0 / 5.0;
constexpr double kSpeedScale = 1.0 / 20.0;

EnvEncoding EnvScale() {
  EnvEncoding s = EnvEncoding::Ones();
  s[0] = 1.0 / 5.0;
  s[1] = 1.0;
  s[2] = 100.0;
  s[3] = 1e4;
  s[4] = 1.0 / 30.0;
  s[5] = kLonScale;
  s[6] = kLatScale;
  s[7] = 10.0;
  for (int k = 0; k < 4; ++k) {
    s[8 + 4 * k] = kLonScale;
    s[9 + 4 * k] = kLatScale;
    s[10 + 4 * k] = 0.5;
    s[11 + 4 * k] = 0.5;
  }
  return s;
}

MlpSpec Spec(const std::vector<int>& hidden) {
  MlpSpec spec;
  spec.sizes.push_back(kGeneratorInputDim);
  for (int h : hidden) {
    spec.sizes.push_back(h);
    spec.activations.push_back(Activation::kRelu);
  }
  spec.sizes.push_back(2);
  spec.activations.push_back(Activation::kTanh);
  return spec;
}

}  // namespace

void Validate(const GeneratorConfig& c) {
  for (int h : c.hidden) {
    if (h < 1) throw ConfigError("generator hidden widths must be >= 1");
  }
  if (!(c.learning_rate > 0.0)) {
    throw ConfigError("generator learning_rate must be positive");
  }
  if (!(c.lr_decay > 0.0 && c.lr_decay <= 1.0)) {
    throw ConfigError("generator lr_decay must lie in (0, 1]");
  }
  if (c.updates_per_batch < 0) {
    throw ConfigError("generator updates_per_batch must be >= 0");
  }
}

NoiseSequence SampleNoise(NormalSource& source, int horizon) {
  NoiseSequence n;
  n.xi.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    Eigen::Vector4d xi;
    for (int i = 0; i < kNoiseDim; ++i) xi[i] = source.Next();
    n.xi.push_back(xi);
  }
  return n;
}

NoiseSequence NoiseFor(uint64_t seed, int epoch, int key, int copy,
                       int horizon) {
  NormalSource source(DeriveSeed(seed, "xi",
                                 {static_cast<uint64_t>(epoch),
                                  static_cast<uint64_t>(key),
                                  static_cast<uint64_t>(copy)}));
  return SampleNoise(source, horizon);
}

uint64_t Fingerprint(const NoiseSequence& noise) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<uint64_t>(noise.size()));
  for (const Eigen::Vector4d& xi : noise.xi) {
    for (int i = 0; i < kNoiseDim; ++i) {
      uint64_t bits;
      std::memcpy(&bits, &xi[i], sizeof(bits));
      mix(bits);
    }
  }
  return h;
}

PolicyGenerator::PolicyGenerator(const GeneratorConfig& config,
                                 const ControlLimits& limits,
                                 const DynamicsVariant& dynamics)
    : net_(Spec(config.hidden)),
      params_(Eigen::VectorXd::Zero(net_.num_params())),
      limits_(limits),
      dynamics_(dynamics),
      hidden_(config.hidden) {}

void PolicyGenerator::set_params(const Eigen::VectorXd& params) {
  if (params.size() != net_.num_params()) {
    throw StructuralError("generator expects " +
                          std::to_string(net_.num_params()) +
                          " parameters, got " + std::to_string(params.size()));
  }
  params_ = params;
}

void PolicyGenerator::Initialize(uint64_t seed) {
  params_ = net_.Initialize(seed, /*zero_last_layer=*/true);
}

Eigen::VectorXd PolicyGenerator::Input(const State& s, const State& x0,
                                       const Control& prev,
                                       const EnvEncoding& env,
                                       const Eigen::Vector4d& xi) const {
  static const EnvEncoding kEnvScale = EnvScale();
  Eigen::VectorXd in(kGeneratorInputDim);
  in[0] = (s.x - x0.x) * kLonScale;
  in[1] = (s.y - x0.y) * kLatScale;
  in[2] = s.v * kSpeedScale;
  in[3] = s.h;
  in[4] = prev.accel / limits_.accel_max;
  in[5] = prev.steer / limits_.steer_max;
  in.segment<kEnvEncodingDim>(kGeneratorStateDim) = env.cwiseProduct(kEnvScale);
  in.tail<kNoiseDim>() = xi;
  return in;
}

GeneratedSample PolicyGenerator::Generate(const State& x0,
                                          const Environment& env,
                                          const History& history,
                                          const NoiseSequence& noise) const {
  const DynamicsVariant dyn = dynamics_.WithDt(env.dt);
  const EnvEncoding enc = EncodeEnvironment(env, x0);
  GeneratedSample out;
  out.noise_fingerprint = Fingerprint(noise);
  State x = x0;
  Control prev = history.last_control();
  for (int t = 0; t < noise.size(); ++t) {
    const Eigen::MatrixXd o =
        net_.Forward(params_, Input(x, x0, prev, enc, noise.xi[t]));
    const Control u{o(0, 0) * limits_.accel_max, o(1, 0) * limits_.steer_max};
    x = Step(x, u, dyn);
    out.controls.controls.push_back(u);
    out.trajectory.states.push_back(x);
    prev = u;
  }
  out.trajectory.controls = out.controls;
  return out;
}

double GeneratorLossGrad(const PolicyGenerator& gen,
                         const std::vector<GeneratorExample>& examples,
                         const Eigen::Vector2d& control_std,
                         Eigen::VectorXd* grad) {
  if (examples.empty()) throw StructuralError("no generator examples");
  if (grad) grad->setZero(gen.num_params());
  const Mlp& net = gen.network();
  const ControlLimits& lim = gen.limits();
  const Eigen::Vector2d inv_var = control_std.cwiseProduct(control_std).cwiseInverse();
  double loss = 0.0;
  for (const GeneratorExample& ex : examples) {
    if (!ex.agent) throw StructuralError("generator example without agent");
    if (Fingerprint(ex.noise) != ex.init_fingerprint) {
      throw ContractError(
          "generator noise differs from the noise used at initialization");
    }
    const int horizon = ex.noise.size();
    if (ex.refined.size() != horizon) {
      throw StructuralError("refined controls and noise differ in length");
    }
    const State& x0 = ex.agent->history.initial_state();
    const DynamicsVariant dyn = gen.dynamics().WithDt(ex.agent->env.dt);
    const EnvEncoding enc = EncodeEnvironment(ex.agent->env, x0);
    const ControlSequence refined =
        ex.refined.mode == ControlMode::kDelta
            ? ToAbsolute(ex.refined, ex.agent->history.last_control())
            : ex.refined;

    std::vector<Mlp::Tape> tapes(horizon);
    std::vector<State> xs(horizon + 1);
    std::vector<Control> us(horizon);
    std::vector<Eigen::Vector2d> d_u(horizon);
    xs[0] = x0;
    Control prev = ex.agent->history.last_control();
    for (int t = 0; t < horizon; ++t) {
      const Eigen::MatrixXd o = net.Forward(
          gen.params(), gen.Input(xs[t], x0, prev, enc, ex.noise.xi[t]),
          &tapes[t]);
      us[t] = {o(0, 0) * lim.accel_max, o(1, 0) * lim.steer_max};
      xs[t + 1] = Step(xs[t], us[t], dyn);
      const Eigen::Vector2d r(us[t].accel - refined.controls[t].accel,
                              us[t].steer - refined.controls[t].steer);
      loss += r.cwiseProduct(r).dot(inv_var) / horizon;
      d_u[t] = (2.0 / horizon) * r.cwiseProduct(inv_var);
      prev = us[t];
    }
    if (!grad) continue;

    Eigen::Vector4d lam_x = Eigen::Vector4d::Zero();
    Eigen::Vector2d carry_u = Eigen::Vector2d::Zero();
    Eigen::MatrixXd d_out(2, 1);
    for (int t = horizon - 1; t >= 0; --t) {
      const StepJacobian J = StepJacobians(xs[t], us[t], dyn);
      const Eigen::Vector2d gu = d_u[t] + carry_u + J.B.transpose() * lam_x;
      d_out(0, 0) = gu[0] * lim.accel_max;
      d_out(1, 0) = gu[1] * lim.steer_max;
      const Eigen::MatrixXd d_in =
          net.Backward(gen.params(), tapes[t], d_out, grad);
      Eigen::Vector4d from_input(d_in(0, 0) * kLonScale,
                                 d_in(1, 0) * kLatScale,
                                 d_in(2, 0) * kSpeedScale, d_in(3, 0));
      lam_x = J.A.transpose() * lam_x + from_input;
      carry_u = Eigen::Vector2d(d_in(4, 0) / lim.accel_max,
                                d_in(5, 0) / lim.steer_max);
    }
  }
  const double n = static_cast<double>(examples.size());
  if (grad) *grad /= n;
  return loss / n;
}

Json ToJson(const PolicyGenerator& gen) {
  const Eigen::VectorXd& p = gen.params();
  std::vector<int> hidden(gen.network().spec().sizes.begin() + 1,
                          gen.network().spec().sizes.end() - 1);
  return {{"hidden", hidden},
          {"accel_max", gen.limits().accel_max},
          {"steer_max", gen.limits().steer_max},
          {"dynamics", {{"model", ToString(gen.dynamics().model)},
                        {"wheelbase", gen.dynamics().wheelbase},
                        {"dt", gen.dynamics().dt}}},
          {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

PolicyGenerator GeneratorFromJson(const Json& j) {
  try {
    GeneratorConfig config;
    config.hidden = j.at("hidden").get<std::vector<int>>();
    ControlLimits limits;
    limits.accel_max = j.at("accel_max").get<double>();
    limits.steer_max = j.at("steer_max").get<double>();
    DynamicsVariant dynamics;
    if (j.contains("dynamics")) {
      const Json& d = j.at("dynamics");
      dynamics.model = DynamicsModelFromString(d.at("model").get<std::string>());
      dynamics.wheelbase = d.at("wheelbase").get<double>();
      dynamics.dt = d.at("dt").get<double>();
    }
    PolicyGenerator gen(config, limits, dynamics);
    const std::vector<double> p = j.at("params").get<std::vector<double>>();
    gen.set_params(Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()));
    return gen;
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("malformed generator: ") + e.what());
  }
}

GeneratorInit::GeneratorInit(const PolicyGenerator& gen,
                             const std::vector<JointScene>& scenes,
                             uint64_t seed, int copies)
    : gen_(&gen), scenes_(&scenes), seed_(seed), copies_(copies) {
  int key = 0;
  noise_.resize(scenes.size());
  fingerprints_.resize(scenes.size());
  generated_.resize(scenes.size());
  for (size_t s = 0; s < scenes.size(); ++s) {
    offsets_.push_back(key);
    key += scenes[s].size();
    noise_[s].assign(copies, std::vector<NoiseSequence>(scenes[s].size()));
    fingerprints_[s].assign(copies, std::vector<uint64_t>(scenes[s].size()));
    generated_[s].assign(copies, std::vector<ControlSequence>(scenes[s].size()));
  }
}

Eigen::VectorXd GeneratorInit::operator()(const SceneEnergy& energy, int epoch,
                                          int scene, int copy) {
  const JointScene& js = (*scenes_)[scene];
  std::vector<ControlSequence> controls;
  for (int k = 0; k < js.size(); ++k) {
    const Demonstration& a = js.agents[k];
    NoiseSequence xi =
        NoiseFor(seed_, epoch, offsets_[scene] + k, copy, energy.horizon());
    GeneratedSample g =
        gen_->Generate(a.history.initial_state(), a.env, a.history, xi);
    fingerprints_[scene][copy][k] = g.noise_fingerprint;
    noise_[scene][copy][k] = std::move(xi);
    generated_[scene][copy][k] = g.controls;
    controls.push_back(std::move(g.controls));
  }
  return energy.ToZ(controls);
}

const NoiseSequence& GeneratorInit::noise(int scene, int copy, int agent) const {
  return noise_[scene][copy][agent];
}

uint64_t GeneratorInit::fingerprint(int scene, int copy, int agent) const {
  return fingerprints_[scene][copy][agent];
}

const ControlSequence& GeneratorInit::generated(int scene, int copy,
                                                int agent) const {
  return generated_[scene][copy][agent];
}

CoopTrace TrainCooperative(const std::vector<JointScene>& scenes,
                           CostModel& model, PolicyGenerator& gen,
                           const CoopConfig& config) {
  Validate(config.generator);
  const GeneratorConfig& gc = config.generator;
  GeneratorInit init(gen, scenes, DeriveSeed(config.train.seed, "xi"),
                     config.train.samples_per_demo);
  CoopTrace trace;
  AdamState adam = AdamState::Start(gen.params());
  int64_t gen_step = 0;
  double gap_sum = 0.0, loss_sum = 0.0;
  long gap_count = 0, loss_count = 0;
  int current_epoch = 0;
  auto close_epoch = [&]() {
    trace.refinement_gap.push_back(gap_count ? gap_sum / gap_count : 0.0);
    trace.generator_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
    gap_sum = loss_sum = 0.0;
    gap_count = loss_count = 0;
  };

  TrainHooks hooks;
  hooks.init = std::ref(init);
  hooks.after_batch = [&](const BatchOutcome& out) {
    if (out.epoch != current_epoch) {
      close_epoch();
      current_epoch = out.epoch;
    }
    const Eigen::Vector2d& std = model.normalizer().control_std;
    std::vector<GeneratorExample> examples;
    for (size_t slot = 0; slot < out.scenes.size(); ++slot) {
      const int s = out.scenes[slot];
      for (size_t c = 0; c < out.results[slot].size(); ++c) {
        for (size_t k = 0; k < out.results[slot][c].size(); ++k) {
          GeneratorExample ex;
          ex.agent = &scenes[s].agents[k];
          ex.noise = init.noise(s, c, k);
          ex.init_fingerprint = init.fingerprint(s, c, k);
          ex.refined = out.results[slot][c][k].controls;
          const ControlSequence& u0 = init.generated(s, c, k);
          double sq = 0.0;
          for (int t = 0; t < ex.refined.size(); ++t) {
            const double da = (ex.refined.controls[t].accel - u0.controls[t].accel) / std[0];
            const double ds = (ex.refined.controls[t].steer - u0.controls[t].steer) / std[1];
            sq += da * da + ds * ds;
          }
          gap_sum += std::sqrt(sq);
          ++gap_count;
          examples.push_back(std::move(ex));
        }
      }
    }
    if (!gc.update) return;
    const double lr =
        gc.learning_rate * std::pow(gc.lr_decay, static_cast<double>(gen_step));
    ++gen_step;
    Eigen::VectorXd g;
    for (int u = 0; u < gc.updates_per_batch; ++u) {
      const double loss = GeneratorLossGrad(gen, examples, std, &g);
      if (u == 0) {
        loss_sum += loss;
        ++loss_count;
      }
      if (gc.use_adam) {
        adam = AdamStep(std::move(adam), g, lr, gc.adam);
        gen.set_params(adam.params);
      } else {
        gen.set_params(gen.params() - lr * g);
      }
      if (!gen.params().allFinite()) {
        throw DivergenceError("generator parameters became non-finite at epoch " +
                              std::to_string(out.epoch));
      }
    }
    if (gc.use_adam) adam.params = gen.params();
  };
  trace.train = TrainScenes(scenes, model, config.train, hooks);
  close_epoch();
  return trace;
}

CoopResult TrainCooperative(const std::vector<Demonstration>& dataset,
                            const CostConfig& cost, const CoopConfig& config) {
  if (dataset.empty()) throw StructuralError("cannot train on an empty dataset");
  const FeatureNormalizer norm = FitNormalizer(dataset, config.train.features);
  CoopResult out{MakeCost(cost, norm, norm.reference_horizon,
                          DeriveSeed(config.train.seed, "init")),
                 PolicyGenerator(config.generator, config.train.limits,
                                 config.train.dynamics),
                 {}};
  out.generator.Initialize(DeriveSeed(config.train.seed, "generator"));
  const std::vector<JointScene> scenes = AsSingleAgentScenes(dataset);
  out.trace = TrainCooperative(scenes, *out.model, out.generator, config);
  return out;
}

SampleSets Predict(const CostModel& model,
                   const std::vector<Demonstration>& demos,
                   const PredictOptions& options) {
  if (options.samples < 1) throw ConfigError("samples must be >= 1");
  Validate(options.solver);
  const int n = static_cast<int>(demos.size());
  const int m_count = options.samples;
  const uint64_t xi_seed = DeriveSeed(options.solver.seed, "predict_xi");
  SampleSets out(n, std::vector<Trajectory>(m_count));
  ParallelFor(n * m_count, options.workers, [&](int job) {
    const int i = job / m_count;
    const int m = job % m_count;
    const Demonstration& d = demos[i];
    const SceneEnergy energy(model, std::span(&d, 1), d.horizon(),
                             options.dynamics.WithDt(d.env.dt),
                             options.features, options.limits);
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(energy.dim());
    if (options.generator) {
      const NoiseSequence xi = NoiseFor(xi_seed, 0, i, m, d.horizon());
      const GeneratedSample g = options.generator->Generate(
          d.history.initial_state(), d.env, d.history, xi);
      z0 = energy.ToZ({g.controls});
    }
    SamplerConfig config = options.solver;
    config.seed = DeriveSeed(options.solver.seed, "predict",
                             {static_cast<uint64_t>(i), static_cast<uint64_t>(m)});
    out[i][m] = SolveScene(energy, z0, config).front().trajectory;
  });
  return out;
}

}  // namespace ebioc
