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

#include "ebioc/nn.h"

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

Eigen::MatrixXd Activate(Activation a, double slope, const Eigen::MatrixXd& x) {
  switch (a) {
    case Activation::kIdentity:
      return x;
    case Activation::kRelu:
      return x.cwiseMax(0.0);
    case Activation::kLeakyRelu:
      return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
    case Activation::kTanh:
      return x.array().tanh().matrix();
  }
  return x;
}

Eigen::MatrixXd ActivationGrad(Activation a, double slope,
                               const Eigen::MatrixXd& pre,
                               const Eigen::MatrixXd& upstream) {
  switch (a) {
    case Activation::kIdentity:
      return upstream;
    case Activation::kRelu:
      return upstream.cwiseProduct(
          pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    case Activation::kLeakyRelu:
      return upstream.cwiseProduct(
          pre.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; }));
    case Activation::kTanh: {
      const Eigen::ArrayXXd t = pre.array().tanh();
      return (upstream.array() * (1.0 - t * t)).matrix();
    }
  }
  return upstream;
}

}  // namespace

std::string ToString(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation ActivationFromString(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.sizes.size() < 2 ||
      spec_.activations.size() != spec_.sizes.size() - 1) {
    throw StructuralError("MLP needs at least one layer and one activation "
                          "per layer");
  }
  for (int n : spec_.sizes) {
    if (n <= 0) throw StructuralError("MLP layer widths must be positive");
  }
  for (size_t l = 0; l + 1 < spec_.sizes.size(); ++l) {
    offsets_.push_back(num_params_);
    num_params_ += spec_.sizes[l + 1] * (spec_.sizes[l] + 1);
  }
}

Eigen::MatrixXd Mlp::Forward(const Eigen::VectorXd& params,
                             const Eigen::MatrixXd& input, Tape* tape) const {
  if (params.size() != num_params_) {
    throw StructuralError("MLP expects " + std::to_string(num_params_) +
                          " parameters, got " + std::to_string(params.size()));
  }
  if (input.rows() != input_dim()) {
    throw StructuralError("MLP input has " + std::to_string(input.rows()) +
                          " rows, expected " + std::to_string(input_dim()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Eigen::MatrixXd h = input;
  for (int l = 0; l < num_layers(); ++l) {
    const int in = spec_.sizes[l];
    const int out = spec_.sizes[l + 1];
    const RowMajorMap w(params.data() + offsets_[l], out, in);
    const Eigen::Map<const Eigen::VectorXd> b(params.data() + offsets_[l] +
                                                  out * in, out);
    Eigen::MatrixXd pre = w * h;
    pre.colwise() += b;
    if (tape) tape->inputs.push_back(std::move(h));
    h = Activate(spec_.activations[l], spec_.leaky_slope, pre);
    if (tape) tape->pre.push_back(std::move(pre));
  }
  return h;
}

Eigen::MatrixXd Mlp::Backward(const Eigen::VectorXd& params, const Tape& tape,
                              const Eigen::MatrixXd& d_output,
                              Eigen::VectorXd* d_params) const {
  if (d_params && d_params->size() != num_params_) {
    d_params->setZero(num_params_);
  }
  Eigen::MatrixXd g = d_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int in = spec_.sizes[l];
    const int out = spec_.sizes[l + 1];
    g = ActivationGrad(spec_.activations[l], spec_.leaky_slope, tape.pre[l], g);
    if (d_params) {
      RowMajorMutMap dw(d_params->data() + offsets_[l], out, in);
      dw.noalias() += g * tape.inputs[l].transpose();
      d_params->segment(offsets_[l] + out * in, out) += g.rowwise().sum();
    }
    const RowMajorMap w(params.data() + offsets_[l], out, in);
    g = w.transpose() * g;
  }
  return g;
}

Eigen::VectorXd Mlp::Initialize(uint64_t seed, bool zero_last_layer) const {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(num_params_);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < num_layers(); ++l) {
    if (zero_last_layer && l == num_layers() - 1) break;
    const int in = spec_.sizes[l];
    const int out = spec_.sizes[l + 1];
    const double std = std::sqrt(2.0 / in);
    for (int i = 0; i < out * in; ++i) params[offsets_[l] + i] = std * normal(rng);
  }
  return params;
}

}  // namespace ebioc
