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

// Composite day-ahead objective: base regression loss averaged over the 24
// hours, plus alpha * Jensen-Shannon divergence between the softmax-normalized
// predicted and actual day profiles, plus beta * smoothness penalty (sum of
// squared hour-to-hour differences of the prediction). Divergences in nats.

#include <span>
#include <vector>

#include "epf/series.hpp"

namespace epf {

enum class BaseLoss { mae, mse };

struct LossConfig {
  BaseLoss base = BaseLoss::mae;
  double alpha = 1.0;
  double beta = 0.01;
  // When set, batch aggregation follows the unnormalized form: the base term
  // is divided by 24|D| while the JSD and smoothness terms are plain sums over
  // days. The default divides every term by |D|.
  bool literal_batch_scaling = false;

  void validate() const;
};

// Softmax over an arbitrary-length vector with max subtraction.
std::vector<double> softmax(std::span<const double> y);
PriceVector softmax_day(std::span<const double> y);

// KL(p || q) = sum p_i ln(p_i / q_i). Both must be strictly positive and sum to 1.
double kl_div(std::span<const double> p, std::span<const double> q);
double jsd(std::span<const double> p_hat, std::span<const double> p);
double smoothness(std::span<const double> y_hat);

// Per-day composite value.
double composite_loss(std::span<const double> y_hat, std::span<const double> y,
                      const LossConfig& cfg);
// Gradient of composite_loss with respect to y_hat. MAE uses subgradient 0 at a tie.
PriceVector composite_loss_grad(std::span<const double> y_hat, std::span<const double> y,
                                const LossConfig& cfg);

// Weight applied to each day's composite value and gradient when |D| days form a
// batch. Returns {base_weight, divergence_weight}; the base part of a day is its
// 24-hour mean.
struct BatchWeights {
  double base;
  double penalty;
};
BatchWeights batch_weights(std::size_t days, const LossConfig& cfg);

// Batch loss over paired prediction / target days.
double batch_loss(std::span<const PriceVector> y_hat, std::span<const PriceVector> y,
                  const LossConfig& cfg);

// Same gradient as composite_loss_grad, split into base and penalty parts so
// that batch_weights can scale them independently.
struct LossGradParts {
  PriceVector base{};
  PriceVector penalty{};
};
LossGradParts composite_loss_grad_parts(std::span<const double> y_hat, std::span<const double> y,
                                        const LossConfig& cfg);
double base_loss(std::span<const double> y_hat, std::span<const double> y, BaseLoss base);
double penalty_loss(std::span<const double> y_hat, std::span<const double> y,
                    const LossConfig& cfg);

}  // namespace epf
