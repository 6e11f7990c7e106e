// Copyright 2026 The EPF Authors. All Rights Reserved.
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

#pragma once

// Two-layer LSTM forecaster with inverted dropout and a linear 24-output head.
//
// A window of D feature-days is unrolled over D * 24 hourly steps; step t
// consumes column t % 24 of day t / 24. The head reads the last layer-2
// hidden state.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epf/rng.hpp"
#include "epf/series.hpp"
#include "epf/tensor.hpp"

namespace epf {

inline constexpr std::size_t kOutputSize = kHoursPerDay;

enum class LayerId { layer1 = 0, layer2 = 1, dense = 2 };

struct LstmLayerParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  // Input weights (hidden x input), recurrent weights (hidden x hidden),
  // biases (hidden x 1) for the input, forget, output and candidate gates.
  Tensor2 w_i, w_f, w_o, w_g;
  Tensor2 u_i, u_f, u_o, u_g;
  Tensor2 b_i, b_f, b_o, b_g;

  static LstmLayerParams zeros(std::size_t input_size, std::size_t hidden_size);
  void check_shapes() const;
  friend bool operator==(const LstmLayerParams&, const LstmLayerParams&) = default;
};

// Parameter set of the whole network. Gradients use the same type.
struct ModelParams {
  LstmLayerParams layer1;
  LstmLayerParams layer2;
  Tensor2 w_y;  // 24 x hidden
  Tensor2 b_y;  // 24 x 1
  double dropout_rate = 0.0;

  static ModelParams zeros(std::size_t input_size, std::size_t hidden_size,
                           double dropout_rate = 0.0);

  std::size_t input_size() const noexcept { return layer1.input_size; }
  std::size_t hidden_size() const noexcept { return layer1.hidden_size; }
  std::size_t parameter_count() const noexcept;

  // Throws ContractError on inconsistent shapes or non-finite values.
  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using ModelGrads = ModelParams;

struct TensorView {
  std::string name;
  LayerId layer;
  Tensor2* tensor;
};
struct ConstTensorView {
  std::string name;
  LayerId layer;
  const Tensor2* tensor;
};

// Every parameter tensor in a fixed canonical order, with a stable name
// ("layer1.W_i", ..., "dense.W_y", "dense.b_y").
std::vector<TensorView> tensors(ModelParams& p);
std::vector<ConstTensorView> tensors(const ModelParams& p);

ModelGrads zeros_like(const ModelParams& p);
std::vector<double> flatten(const ModelParams& p);
void unflatten(std::span<const double> flat, ModelParams& p);
// Throws ContractError unless every tensor of a and b has matching shape.
void require_same_shapes(const ModelParams& a, const ModelParams& b, const char* what);

struct HiddenState {
  std::vector<double> h;
  std::vector<double> c;

  static HiddenState zeros(std::size_t hidden_size) {
    return {std::vector<double>(hidden_size, 0.0), std::vector<double>(hidden_size, 0.0)};
  }
};

HiddenState lstm_cell_step(const LstmLayerParams& params, std::span<const double> x,
                           const HiddenState& prev);

// Cached activations of one layer over a whole window, stored step-major.
// The previous state of step 0 is zero.
struct LayerTrace {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::size_t steps = 0;
  std::vector<double> x;  // layer input (after dropout for layer 2)
  std::vector<double> i, f, o, g;
  std::vector<double> c, tanh_c, h;

  void resize(std::size_t in, std::size_t hidden, std::size_t n);
  std::span<const double> x_at(std::size_t t) const noexcept {
    return {x.data() + t * input_size, input_size};
  }
  std::span<const double> h_at(std::size_t t) const noexcept {
    return {h.data() + t * hidden_size, hidden_size};
  }
  std::span<const double> c_at(std::size_t t) const noexcept {
    return {c.data() + t * hidden_size, hidden_size};
  }
};

// Per-step dropout multipliers (0 or 1/(1-rate)), steps x hidden, step-major.
// Empty means no dropout.
struct DropoutMasks {
  std::vector<double> after_layer1;
  std::vector<double> after_layer2;

  bool empty() const noexcept { return after_layer1.empty() && after_layer2.empty(); }
  friend bool operator==(const DropoutMasks&, const DropoutMasks&) = default;
};

struct ForwardTrace {
  LayerTrace layer1;
  LayerTrace layer2;
  DropoutMasks masks;
  std::vector<double> head_input;  // final layer-2 hidden state after dropout
  PriceVector prediction{};

  std::size_t steps() const noexcept { return layer1.steps; }
};

enum class Mode { train, infer };

struct ModelSpec {
  std::size_t input_size = 0;  // M
  std::size_t hidden_size = 64;
  double dropout_rate = 0.3;
};

ModelParams init_params(const ModelSpec& spec, SeededRng& rng);

// Runs the window. Train mode draws fresh dropout masks from rng (required);
// infer mode is deterministic and applies no dropout.
ForwardTrace forward(const ModelParams& params, std::span<const FeatureDay> window, Mode mode,
                     SeededRng* rng = nullptr);
// Train-mode forward with caller-supplied masks (gradient checks with a frozen mask).
ForwardTrace forward_with_masks(const ModelParams& params, std::span<const FeatureDay> window,
                                DropoutMasks masks);
PriceVector predict(const ModelParams& params, std::span<const FeatureDay> window);

// Exact gradient of a scalar loss with respect to every parameter, given the
// loss gradient with respect to the prediction.
ModelGrads backward(const ModelParams& params, const ForwardTrace& trace,
                    std::span<const double> dloss_dprediction);
// Accumulating variant; grads must already be shaped like params.
void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         std::span<const double> dloss_dprediction, ModelGrads& grads);

}  // namespace epf
