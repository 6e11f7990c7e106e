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

#include <cstdint>
#include <optional>
#include <utility>

#include "epf/model.hpp"

namespace epf {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::optional<double> clip_norm = 5.0;
};

struct OptimizerState {
  OptimizerConfig config;
  std::uint64_t step_count = 0;
  // Present iff config.kind == adam; shaped like the parameters.
  std::optional<ModelParams> m;
  std::optional<ModelParams> v;

  static OptimizerState create(const OptimizerConfig& cfg, const ModelParams& like);
};

// theta - eta * g for every tensor. Returns a new parameter set.
ModelParams sgd_step(const ModelParams& params, const ModelGrads& grads, double eta);

// Bias-corrected Adam.
std::pair<ModelParams, OptimizerState> adam_step(const OptimizerState& state,
                                                 const ModelParams& params,
                                                 const ModelGrads& grads);

double global_norm(const ModelGrads& grads);
ModelGrads clip_gradients(const ModelGrads& grads, double max_norm);

// Applies the configured update (with optional clipping) in one call.
std::pair<ModelParams, OptimizerState> optimizer_step(const OptimizerState& state,
                                                      const ModelParams& params,
                                                      const ModelGrads& grads);

}  // namespace epf
