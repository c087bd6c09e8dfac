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

#include "ebioc/cost.h"

#include <cmath>
#include <random>
#include <utility>

#include "ebioc/error.h"

namespace ebioc {
namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void CheckFrames(const FrameFeatureMatrix& frames) {
  if (frames.rows() == 0) throw StructuralError("empty feature sequence");
  if (!frames.allFinite()) throw DivergenceError("non-finite frame features");
}

MlpSpec CostMlpSpec(const std::vector<int>& hidden, double slope) {
  MlpSpec spec;
  spec.sizes.push_back(kNumFeatures);
  for (int h : hidden) {
    spec.sizes.push_back(h);
    spec.activations.push_back(Activation::kLeakyRelu);
  }
  spec.sizes.push_back(1);
  spec.activations.push_back(Activation::kIdentity);
  spec.leaky_slope = slope;
  return spec;
}

double Leaky(double v, double slope) { return v > 0.0 ? v : slope * v; }

}  // namespace

std::string ToString(CostKind kind) {
  switch (kind) {
    case CostKind::kLinear: return "linear";
    case CostKind::kMlp: return "mlp";
    case CostKind::kConv: return "cnn";
  }
  return "linear";
}

CostKind CostKindFromString(const std::string& name) {
  if (name == "linear") return CostKind::kLinear;
  if (name == "mlp") return CostKind::kMlp;
  if (name == "cnn" || name == "conv") return CostKind::kConv;
  throw ConfigError("unknown cost kind '" + name + "'");
}

void CostModel::set_params(const Eigen::VectorXd& params) {
  if (params.size() != params_.size()) {
    throw StructuralError("cost model expects " +
                          std::to_string(params_.size()) + " parameters, got " +
                          std::to_string(params.size()));
  }
  params_ = params;
}

// ---------------------------------------------------------------- linear

LinearCost::LinearCost(const FeatureNormalizer& normalizer,
                       const FeatureVector& theta)
    : CostModel(kNumFeatures, normalizer) {
  params_ = theta;
}

std::unique_ptr<CostModel> LinearCost::Clone() const {
  return std::make_unique<LinearCost>(*this);
}

nlohmann::json LinearCost::Layout() const {
  return {{"kind", "linear"}, {"num_params", kNumFeatures}};
}

double LinearCost::Value(const FrameFeatureMatrix& frames) const {
  CheckFrames(frames);
  const FeatureVector phi = frames.colwise().sum().transpose();
  return params_.dot(normalizer_.Apply(phi));
}

double LinearCost::Backward(const FrameFeatureMatrix& frames,
                            FrameFeatureMatrix* d_frames,
                            Eigen::VectorXd* d_params) const {
  CheckFrames(frames);
  const FeatureVector phi = frames.colwise().sum().transpose();
  const FeatureVector normalized = normalizer_.Apply(phi);
  if (d_frames) {
    const FeatureVector w = params_.cwiseQuotient(normalizer_.divisor);
    d_frames->resize(frames.rows(), kNumFeatures);
    d_frames->rowwise() = w.transpose();
  }
  if (d_params) *d_params = normalized;
  return params_.dot(normalized);
}

// ---------------------------------------------------------------- mlp

MlpCost::MlpCost(const FeatureNormalizer& normalizer, std::vector<int> hidden,
                 double leaky_slope)
    : CostModel(0, normalizer),
      hidden_(std::move(hidden)),
      net_(CostMlpSpec(hidden_, leaky_slope)) {
  params_ = Eigen::VectorXd::Zero(net_.num_params());
}

std::unique_ptr<CostModel> MlpCost::Clone() const {
  return std::make_unique<MlpCost>(*this);
}

nlohmann::json MlpCost::Layout() const {
  return {{"kind", "mlp"},
          {"hidden", hidden_},
          {"leaky_slope", net_.spec().leaky_slope},
          {"num_params", net_.num_params()}};
}

double MlpCost::Value(const FrameFeatureMatrix& frames) const {
  return Backward(frames, nullptr, nullptr);
}

double MlpCost::Backward(const FrameFeatureMatrix& frames,
                         FrameFeatureMatrix* d_frames,
                         Eigen::VectorXd* d_params) const {
  CheckFrames(frames);
  const FeatureVector scale = normalizer_.FrameScale();
  const Eigen::MatrixXd input =
      (frames.transpose().array().colwise() * scale.array()).matrix();
  const bool need_grad = d_frames || d_params;
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net_.Forward(params_, input, need_grad ? &tape : nullptr);
  const double value = out.sum();
  if (!need_grad) return value;
  if (d_params) d_params->setZero(net_.num_params());
  const Eigen::MatrixXd d_out = Eigen::MatrixXd::Ones(1, input.cols());
  const Eigen::MatrixXd d_input = net_.Backward(params_, tape, d_out, d_params);
  if (d_frames) {
    *d_frames = (d_input.array().colwise() * scale.array()).matrix().transpose();
  }
  return value;
}

// ---------------------------------------------------------------- conv

struct ConvCost::Tape {
  std::vector<Eigen::MatrixXd> patches;  // (C_in * k) x L_out per layer
  std::vector<Eigen::MatrixXd> pre;      // C_out x L_out per layer
  Eigen::VectorXd flat;                  // flattened last activation
};

ConvCost::ConvCost(const FeatureNormalizer& normalizer, int horizon,
                   std::vector<int> channels, std::vector<int> strides,
                   int kernel, double leaky_slope)
    : CostModel(0, normalizer),
      horizon_(horizon),
      channels_(std::move(channels)),
      strides_(std::move(strides)),
      kernel_(kernel),
      leaky_slope_(leaky_slope) {
  if (channels_.empty() || channels_.size() != strides_.size()) {
    throw StructuralError("conv stack needs one stride per channel entry");
  }
  if (kernel_ < 1) throw StructuralError("conv kernel must be positive");
  lengths_.push_back(horizon_);
  int in_ch = kNumFeatures;
  int count = 0;
  for (size_t l = 0; l < channels_.size(); ++l) {
    const int len = lengths_.back();
    if (strides_[l] < 1 || channels_[l] < 1) {
      throw StructuralError("conv strides and channels must be positive");
    }
    if (len < kernel_) {
      throw StructuralError("conv layer " + std::to_string(l) +
                            " sees length " + std::to_string(len) +
                            " < kernel " + std::to_string(kernel_) +
                            "; horizon " + std::to_string(horizon_) +
                            " is incompatible with the stack");
    }
    lengths_.push_back((len - kernel_ + strides_[l] - 1) / strides_[l] + 1);
    offsets_.push_back(count);
    count += channels_[l] * (in_ch * kernel_ + 1);
    in_ch = channels_[l];
  }
  offsets_.push_back(count);
  count += in_ch * lengths_.back() + 1;
  params_ = Eigen::VectorXd::Zero(count);
}

std::unique_ptr<CostModel> ConvCost::Clone() const {
  return std::make_unique<ConvCost>(*this);
}

nlohmann::json ConvCost::Layout() const {
  return {{"kind", "cnn"},       {"horizon", horizon_},
          {"channels", channels_}, {"strides", strides_},
          {"kernel", kernel_},   {"leaky_slope", leaky_slope_},
          {"num_params", params_.size()}};
}

Eigen::VectorXd ConvCost::Initialize(uint64_t seed) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(params_.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  int in_ch = kNumFeatures;
  for (size_t l = 0; l < channels_.size(); ++l) {
    const int fan_in = in_ch * kernel_;
    const double std = std::sqrt(2.0 / fan_in);
    for (int i = 0; i < channels_[l] * fan_in; ++i) {
      p[offsets_[l] + i] = std * normal(rng);
    }
    in_ch = channels_[l];
  }
  const int fan_in = in_ch * lengths_.back();
  const double std = std::sqrt(2.0 / fan_in);
  for (int i = 0; i < fan_in; ++i) p[offsets_.back() + i] = std * normal(rng);
  return p;
}

double ConvCost::Run(const FrameFeatureMatrix& frames, Tape* tape) const {
  CheckFrames(frames);
  if (frames.rows() != horizon_) {
    throw StructuralError("conv cost built for horizon " +
                          std::to_string(horizon_) + " got " +
                          std::to_string(frames.rows()) + " frames");
  }
  const FeatureVector scale = normalizer_.FrameScale();
  Eigen::MatrixXd x =
      (frames.transpose().array().colwise() * scale.array()).matrix();
  int in_ch = kNumFeatures;
  for (size_t l = 0; l < channels_.size(); ++l) {
    const int len_in = lengths_[l];
    const int len_out = lengths_[l + 1];
    Eigen::MatrixXd patch = Eigen::MatrixXd::Zero(in_ch * kernel_, len_out);
    for (int i = 0; i < len_out; ++i) {
      for (int c = 0; c < in_ch; ++c) {
        for (int j = 0; j < kernel_; ++j) {
          const int src = i * strides_[l] + j;
          if (src < len_in) patch(c * kernel_ + j, i) = x(c, src);
        }
      }
    }
    const RowMajorMap w(params_.data() + offsets_[l], channels_[l],
                        in_ch * kernel_);
    const Eigen::Map<const Eigen::VectorXd> b(
        params_.data() + offsets_[l] + channels_[l] * in_ch * kernel_,
        channels_[l]);
    Eigen::MatrixXd pre = w * patch;
    pre.colwise() += b;
    x = pre.unaryExpr([this](double v) { return Leaky(v, leaky_slope_); });
    if (tape) {
      tape->patches.push_back(std::move(patch));
      tape->pre.push_back(std::move(pre));
    }
    in_ch = channels_[l];
  }
  // channel-major flattening
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rm = x;
  const Eigen::Map<const Eigen::VectorXd> flat(rm.data(), rm.size());
  const int n = static_cast<int>(flat.size());
  const double value =
      params_.segment(offsets_.back(), n).dot(flat) + params_[offsets_.back() + n];
  if (tape) tape->flat = flat;
  return value;
}

double ConvCost::Value(const FrameFeatureMatrix& frames) const {
  return Run(frames, nullptr);
}

double ConvCost::Backward(const FrameFeatureMatrix& frames,
                          FrameFeatureMatrix* d_frames,
                          Eigen::VectorXd* d_params) const {
  if (!d_frames && !d_params) return Run(frames, nullptr);
  Tape tape;
  const double value = Run(frames, &tape);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  const int n = static_cast<int>(tape.flat.size());
  grad.segment(offsets_.back(), n) = tape.flat;
  grad[offsets_.back() + n] = 1.0;

  const int last = static_cast<int>(channels_.size()) - 1;
  // d value / d last activation, channel-major
  Eigen::MatrixXd g(channels_[last], lengths_.back());
  for (int c = 0; c < channels_[last]; ++c) {
    for (int i = 0; i < lengths_.back(); ++i) {
      g(c, i) = params_[offsets_.back() + c * lengths_.back() + i];
    }
  }
  for (int l = last; l >= 0; --l) {
    const int in_ch = l == 0 ? kNumFeatures : channels_[l - 1];
    const Eigen::MatrixXd& pre = tape.pre[l];
    const Eigen::MatrixXd dpre = g.cwiseProduct(pre.unaryExpr(
        [this](double v) { return v > 0.0 ? 1.0 : leaky_slope_; }));
    RowMajorMutMap dw(grad.data() + offsets_[l], channels_[l], in_ch * kernel_);
    dw.noalias() += dpre * tape.patches[l].transpose();
    grad.segment(offsets_[l] + channels_[l] * in_ch * kernel_, channels_[l]) +=
        dpre.rowwise().sum();
    const RowMajorMap w(params_.data() + offsets_[l], channels_[l],
                        in_ch * kernel_);
    const Eigen::MatrixXd dpatch = w.transpose() * dpre;
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(in_ch, lengths_[l]);
    for (int i = 0; i < lengths_[l + 1]; ++i) {
      for (int c = 0; c < in_ch; ++c) {
        for (int j = 0; j < kernel_; ++j) {
          const int src = i * strides_[l] + j;
          if (src < lengths_[l]) dx(c, src) += dpatch(c * kernel_ + j, i);
        }
      }
    }
    g = std::move(dx);
  }
  if (d_frames) {
    const FeatureVector scale = normalizer_.FrameScale();
    *d_frames = (g.array().colwise() * scale.array()).matrix().transpose();
  }
  if (d_params) *d_params = std::move(grad);
  return value;
}

// ---------------------------------------------------------------- factory

std::unique_ptr<CostModel> MakeCost(const CostConfig& config,
                                    const FeatureNormalizer& normalizer,
                                    int horizon, uint64_t seed) {
  switch (config.kind) {
    case CostKind::kLinear: {
      auto model = std::make_unique<LinearCost>(normalizer);
      if (config.linear_init == "normal") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd theta(kNumFeatures);
        for (int k = 0; k < kNumFeatures; ++k) theta[k] = normal(rng);
        model->set_params(theta);
      } else if (config.linear_init != "zeros") {
        throw ConfigError("unknown linear_init '" + config.linear_init + "'");
      }
      return model;
    }
    case CostKind::kMlp: {
      auto model =
          std::make_unique<MlpCost>(normalizer, config.mlp_hidden,
                                    config.leaky_slope);
      model->set_params(model->network().Initialize(seed));
      return model;
    }
    case CostKind::kConv: {
      auto model = std::make_unique<ConvCost>(
          normalizer, horizon, config.conv_channels, config.conv_strides,
          config.conv_kernel, config.leaky_slope);
      model->set_params(model->Initialize(seed));
      return model;
    }
  }
  throw ConfigError("unknown cost kind");
}

std::unique_ptr<CostModel> CostFromLayout(const nlohmann::json& layout,
                                          const Eigen::VectorXd& params,
                                          const FeatureNormalizer& normalizer) {
  const CostKind kind = CostKindFromString(layout.at("kind").get<std::string>());
  std::unique_ptr<CostModel> model;
  switch (kind) {
    case CostKind::kLinear:
      model = std::make_unique<LinearCost>(normalizer);
      break;
    case CostKind::kMlp:
      model = std::make_unique<MlpCost>(
          normalizer, layout.at("hidden").get<std::vector<int>>(),
          layout.at("leaky_slope").get<double>());
      break;
    case CostKind::kConv:
      model = std::make_unique<ConvCost>(
          normalizer, layout.at("horizon").get<int>(),
          layout.at("channels").get<std::vector<int>>(),
          layout.at("strides").get<std::vector<int>>(),
          layout.at("kernel").get<int>(),
          layout.at("leaky_slope").get<double>());
      break;
  }
  model->set_params(params);
  return model;
}

double CostValue(const CostModel& model, const Trajectory& traj,
                 const Environment& env, const History& history,
                 const FeatureConfig& config) {
  return model.Value(FrameFeatureRows(traj, env, history, config));
}

Eigen::VectorXd GradWrtParams(const CostModel& model, const Trajectory& traj,
                              const Environment& env, const History& history,
                              const FeatureConfig& config) {
  Eigen::VectorXd grad;
  model.Backward(FrameFeatureRows(traj, env, history, config), nullptr, &grad);
  return grad;
}

}  // namespace ebioc
