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

// Parameterized trajectory costs C_theta over the hand-crafted frame features.
//
// Every model consumes the raw T x 10 frame-feature matrix and applies its
// normalizer internally:
//   linear  C = sum_k theta_k (sum_t F_tk) / divisor_k
//   mlp     C = sum_t mlp(F_t * scale), scale = reference_horizon / divisor
//   conv    C = linear(conv stack(F * scale))
// Gradients with respect to the features are exact; gradients with respect
// to controls are obtained by chaining them through the feature Jacobians
// and the unrolled dynamics (see objective.h).

#ifndef EBIOC_COST_H_
#define EBIOC_COST_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ebioc/features.h"
#include "ebioc/nn.h"

namespace ebioc {

enum class CostKind { kLinear, kMlp, kConv };

std::string ToString(CostKind kind);
CostKind CostKindFromString(const std::string& name);

struct CostConfig {
  CostKind kind = CostKind::kLinear;
  // linear: "normal" (standard normal) or "zeros"
  std::string linear_init = "normal";
  std::vector<int> mlp_hidden = {64, 64};
  double leaky_slope = 0.01;
  std::vector<int> conv_channels = {32, 64, 128, 256};
  std::vector<int> conv_strides = {2, 2, 2, 1};
  int conv_kernel = 4;
};

class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual CostKind kind() const = 0;
  // true when the cost is a sum of per-frame terms
  virtual bool markovian() const = 0;
  virtual std::unique_ptr<CostModel> Clone() const = 0;
  // architecture descriptor stored in checkpoints
  virtual nlohmann::json Layout() const = 0;

  virtual double Value(const FrameFeatureMatrix& frames) const = 0;
  // Returns the value. Writes dC/dframes into *d_frames and dC/dtheta into
  // *d_params (both resized) when non-null.
  virtual double Backward(const FrameFeatureMatrix& frames,
                          FrameFeatureMatrix* d_frames,
                          Eigen::VectorXd* d_params) const = 0;

  int num_params() const { return static_cast<int>(params_.size()); }
  const Eigen::VectorXd& params() const { return params_; }
  void set_params(const Eigen::VectorXd& params);

  const FeatureNormalizer& normalizer() const { return normalizer_; }
  void set_normalizer(const FeatureNormalizer& n) { normalizer_ = n; }

 protected:
  CostModel(int num_params, const FeatureNormalizer& normalizer)
      : params_(Eigen::VectorXd::Zero(num_params)), normalizer_(normalizer) {}

  Eigen::VectorXd params_;
  FeatureNormalizer normalizer_;
};

class LinearCost : public CostModel {
 public:
  explicit LinearCost(const FeatureNormalizer& normalizer = {},
                      const FeatureVector& theta = FeatureVector::Zero());

  CostKind kind() const override { return CostKind::kLinear; }
  bool markovian() const override { return true; }
  std::unique_ptr<CostModel> Clone() const override;
  nlohmann::json Layout() const override;
  double Value(const FrameFeatureMatrix& frames) const override;
  double Backward(const FrameFeatureMatrix& frames,
                  FrameFeatureMatrix* d_frames,
                  Eigen::VectorXd* d_params) const override;
};

class MlpCost : public CostModel {
 public:
  MlpCost(const FeatureNormalizer& normalizer, std::vector<int> hidden,
          double leaky_slope = 0.01);

  CostKind kind() const override { return CostKind::kMlp; }
  bool markovian() const override { return true; }
  std::unique_ptr<CostModel> Clone() const override;
  nlohmann::json Layout() const override;
  double Value(const FrameFeatureMatrix& frames) const override;
  double Backward(const FrameFeatureMatrix& frames,
                  FrameFeatureMatrix* d_frames,
                  Eigen::VectorXd* d_params) const override;

  const Mlp& network() const { return net_; }

 private:
  std::vector<int> hidden_;
  Mlp net_;
};

// Temporal 1-D convolutions over the frame axis. Windows that overrun the
// end of the sequence are zero-padded on the right, so a layer maps length L
// to ceil((L - kernel) / stride) + 1; every layer needs L >= kernel.
class ConvCost : public CostModel {
 public:
  ConvCost(const FeatureNormalizer& normalizer, int horizon,
           std::vector<int> channels, std::vector<int> strides, int kernel,
           double leaky_slope = 0.01);

  CostKind kind() const override { return CostKind::kConv; }
  bool markovian() const override { return false; }
  std::unique_ptr<CostModel> Clone() const override;
  nlohmann::json Layout() const override;
  double Value(const FrameFeatureMatrix& frames) const override;
  double Backward(const FrameFeatureMatrix& frames,
                  FrameFeatureMatrix* d_frames,
                  Eigen::VectorXd* d_params) const override;

  int horizon() const { return horizon_; }
  // sequence length after each layer, starting with the input length
  const std::vector<int>& lengths() const { return lengths_; }
  // Kaiming-normal initialization of all convolution and output weights.
  Eigen::VectorXd Initialize(uint64_t seed) const;

 private:
  struct Tape;
  double Run(const FrameFeatureMatrix& frames, Tape* tape) const;

  int horizon_;
  std::vector<int> channels_;
  std::vector<int> strides_;
  int kernel_;
  double leaky_slope_;
  std::vector<int> lengths_;
  std::vector<int> offsets_;  // parameter offset of each layer (+ output)
};

// Builds a model for `horizon`-frame trajectories and initializes its
// parameters (standard normal for linear, Kaiming for neural kinds).
std::unique_ptr<CostModel> MakeCost(const CostConfig& config,
                                    const FeatureNormalizer& normalizer,
                                    int horizon, uint64_t seed);

// Rebuilds a model from Layout() plus parameters and normalizer.
std::unique_ptr<CostModel> CostFromLayout(const nlohmann::json& layout,
                                          const Eigen::VectorXd& params,
                                          const FeatureNormalizer& normalizer);

// Single-trajectory conveniences.
double CostValue(const CostModel& model, const Trajectory& traj,
                 const Environment& env, const History& history,
                 const FeatureConfig& config = {});
// dC/dtheta at a fixed trajectory; equals the normalized trajectory features
// for the linear model.
Eigen::VectorXd GradWrtParams(const CostModel& model, const Trajectory& traj,
                              const Environment& env, const History& history,
                              const FeatureConfig& config = {});

}  // namespace ebioc

#endif  // EBIOC_COST_H_
