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

#include "epf/optimizer.hpp"

#include <cmath>

#include "epf/error.hpp"

namespace epf {

OptimizerState OptimizerState::create(const OptimizerConfig& cfg, const ModelParams& like) {
  if (!(cfg.eta >= 0.0)) throw ConfigError("optimizer: learning rate must be >= 0");
  if (cfg.clip_norm && !(*cfg.clip_norm > 0.0)) throw ConfigError("optimizer: clip_norm must be > 0");
  OptimizerState s;
  s.config = cfg;
  if (cfg.kind == OptimizerKind::adam) {
    s.m = zeros_like(like);
    s.v = zeros_like(like);
  }
  return s;
}

ModelParams sgd_step(const ModelParams& params, const ModelGrads& grads, double eta) {
  require_same_shapes(params, grads, "sgd_step");
  ModelParams out = params;
  auto dst = tensors(out);
  const auto g = tensors(grads);
  for (std::size_t k = 0; k < dst.size(); ++k) {
    auto d = dst[k].tensor->flat();
    auto s = g[k].tensor->flat();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= eta * s[i];
  }
  return out;
}

std::pair<ModelParams, OptimizerState> adam_step(const OptimizerState& state,
                                                 const ModelParams& params,
                                                 const ModelGrads& grads) {
  if (state.config.kind != OptimizerKind::adam || !state.m || !state.v) {
    throw ContractError("adam_step: optimizer state is not Adam");
  }
  require_same_shapes(params, grads, "adam_step");
  require_same_shapes(params, *state.m, "adam_step(moments)");

  const OptimizerConfig& c = state.config;
  OptimizerState next = state;
  next.step_count += 1;
  const double t = double(next.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  ModelParams out = params;
  auto p = tensors(out);
  auto m = tensors(*next.m);
  auto v = tensors(*next.v);
  const auto g = tensors(grads);
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pk = p[k].tensor->flat();
    auto mk = m[k].tensor->flat();
    auto vk = v[k].tensor->flat();
    auto gk = g[k].tensor->flat();
    for (std::size_t i = 0; i < pk.size(); ++i) {
      mk[i] = c.beta1 * mk[i] + (1.0 - c.beta1) * gk[i];
      vk[i] = c.beta2 * vk[i] + (1.0 - c.beta2) * gk[i] * gk[i];
      const double m_hat = mk[i] / correction1;
      const double v_hat = vk[i] / correction2;
      pk[i] -= c.eta * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
  return {std::move(out), std::move(next)};
}

double global_norm(const ModelGrads& grads) {
  double s = 0.0;
  for (const auto& v : tensors(grads)) {
    for (double x : v.tensor->flat()) s += x * x;
  }
  return std::sqrt(s);
}

ModelGrads clip_gradients(const ModelGrads& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ContractError("clip_gradients: max_norm must be > 0");
  const double norm = global_norm(grads);
  if (!(norm > max_norm)) return grads;
  const double scale = max_norm / norm;
  ModelGrads out = grads;
  for (auto& v : tensors(out)) {
    for (double& x : v.tensor->flat()) x *= scale;
  }
  return out;
}

std::pair<ModelParams, OptimizerState> optimizer_step(const OptimizerState& state,
                                                      const ModelParams& params,
                                                      const ModelGrads& grads) {
  const ModelGrads* g = &grads;
  ModelGrads clipped;
  if (state.config.clip_norm) {
    clipped = clip_gradients(grads, *state.config.clip_norm);
    g = &clipped;
  }
  if (state.config.kind == OptimizerKind::adam) return adam_step(state, params, *g);
  OptimizerState next = state;
  next.step_count += 1;
  return {sgd_step(params, *g, state.config.eta), std::move(next)};
}

}  // namespace epf
