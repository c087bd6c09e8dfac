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

// Minimal dense network with flat parameter storage and manual reverse-mode
// differentiation. Inputs are column batches (features x N).

#ifndef EBIOC_NN_H_
#define EBIOC_NN_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ebioc {

enum class Activation { kIdentity, kRelu, kLeakyRelu, kTanh };

std::string ToString(Activation a);
Activation ActivationFromString(const std::string& name);

struct MlpSpec {
  // sizes[0] is the input width, sizes.back() the output width
  std::vector<int> sizes;
  // one per layer (sizes.size() - 1 entries)
  std::vector<Activation> activations;
  double leaky_slope = 0.01;
};

class Mlp {
 public:
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input of every layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of every layer
  };

  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  int num_layers() const { return static_cast<int>(spec_.activations.size()); }
  int num_params() const { return num_params_; }
  int input_dim() const { return spec_.sizes.front(); }
  int output_dim() const { return spec_.sizes.back(); }

  // Layout per layer: W (out x in, row-major) followed by b (out).
  Eigen::MatrixXd Forward(const Eigen::VectorXd& params,
                          const Eigen::MatrixXd& input,
                          Tape* tape = nullptr) const;
  // Returns dL/dinput; adds dL/dparams into *d_params when non-null.
  Eigen::MatrixXd Backward(const Eigen::VectorXd& params, const Tape& tape,
                           const Eigen::MatrixXd& d_output,
                           Eigen::VectorXd* d_params) const;

  // Kaiming-normal weights (std sqrt(2 / fan_in)), zero biases. The last
  // layer is zeroed when `zero_last_layer` is set.
  Eigen::VectorXd Initialize(uint64_t seed, bool zero_last_layer = false) const;

 private:
  MlpSpec spec_;
  std::vector<int> offsets_;
  int num_params_ = 0;
};

}  // namespace ebioc

#endif  // EBIOC_NN_H_
