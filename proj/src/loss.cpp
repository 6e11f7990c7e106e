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

#include "epf/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "epf/error.hpp"

namespace epf {

namespace {

void require_finite(std::span<const double> y, const char* what) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) {
      throw DomainError(std::string(what) + ": non-finite element at index " + std::to_string(i), i);
    }
  }
}

void require_prob(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !std::isfinite(p[i])) {
      throw ContractError(std::string(what) + ": probability " + std::to_string(i) +
                          " is not strictly positive");
    }
    sum += p[i];
  }
  if (p.empty() || std::abs(sum - 1.0) > 1e-12) {
    throw ContractError(std::string(what) + ": probabilities do not sum to 1");
  }
}

void require_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(what, a.size(), 1, b.size(), 1);
}

void require_day(std::span<const double> y, const char* what) {
  if (y.size() != kHoursPerDay) throw DimensionError(what, y.size(), 1, kHoursPerDay, 1);
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("loss: alpha and beta must be >= 0");
}

std::vector<double> softmax(std::span<const double> y) {
  require_finite(y, "softmax");
  std::vector<double> p(y.size());
  if (y.empty()) return p;
  const double mx = *std::max_element(y.begin(), y.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    p[i] = std::exp(y[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

PriceVector softmax_day(std::span<const double> y) {
  require_day(y, "softmax_day");
  const auto p = softmax(y);
  PriceVector out;
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

double kl_div(std::span<const double> p, std::span<const double> q) {
  require_pair(p, q, "kl_div");
  require_prob(p, "kl_div(p)");
  require_prob(q, "kl_div(q)");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

double jsd(std::span<const double> p_hat, std::span<const double> p) {
  require_pair(p_hat, p, "jsd");
  require_prob(p_hat, "jsd(p_hat)");
  require_prob(p, "jsd(p)");
  // Each KL term is summed directly against the midpoint; the midpoint itself
  // need not re-normalize to exactly 1.
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p_hat[i] + p[i]);
    a += p_hat[i] * std::log(p_hat[i] / m);
    b += p[i] * std::log(p[i] / m);
  }
  return 0.5 * a + 0.5 * b;
}

double smoothness(std::span<const double> y_hat) {
  require_finite(y_hat, "smoothness");
  // Terms are summed in sorted order so that reversing the day gives the same bits.
  std::array<double, kHoursPerDay> terms{};
  const std::size_t n = y_hat.size() > 1 ? y_hat.size() - 1 : 0;
  std::vector<double> heap;
  double* sq = terms.data();
  if (n > terms.size()) {
    heap.resize(n);
    sq = heap.data();
  }
  for (std::size_t t = 1; t < y_hat.size(); ++t) {
    const double d = y_hat[t] - y_hat[t - 1];
    sq[t - 1] = d * d;
  }
  std::sort(sq, sq + n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += sq[k];
  return s;
}

double base_loss(std::span<const double> y_hat, std::span<const double> y, BaseLoss base) {
  require_day(y_hat, "base_loss(y_hat)");
  require_day(y, "base_loss(y)");
  double s = 0.0;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    const double e = y_hat[t] - y[t];
    s += base == BaseLoss::mae ? std::abs(e) : e * e;
  }
  return s / double(kHoursPerDay);
}

double penalty_loss(std::span<const double> y_hat, std::span<const double> y,
                    const LossConfig& cfg) {
  double out = 0.0;
  if (cfg.alpha != 0.0) {
    const auto ph = softmax_day(y_hat);
    const auto p = softmax_day(y);
    out += cfg.alpha * jsd(ph, p);
  }
  if (cfg.beta != 0.0) out += cfg.beta * smoothness(y_hat);
  return out;
}

double composite_loss(std::span<const double> y_hat, std::span<const double> y,
                      const LossConfig& cfg) {
  require_finite(y_hat, "composite_loss(y_hat)");
  require_finite(y, "composite_loss(y)");
  return base_loss(y_hat, y, cfg.base) + penalty_loss(y_hat, y, cfg);
}

LossGradParts composite_loss_grad_parts(std::span<const double> y_hat, std::span<const double> y,
                                        const LossConfig& cfg) {
  require_day(y_hat, "composite_loss_grad(y_hat)");
  require_day(y, "composite_loss_grad(y)");
  require_finite(y_hat, "composite_loss_grad(y_hat)");
  require_finite(y, "composite_loss_grad(y)");
  LossGradParts g;
  constexpr double inv_t = 1.0 / double(kHoursPerDay);
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    const double e = y_hat[t] - y[t];
    if (cfg.base == BaseLoss::mae) {
      g.base[t] = e > 0.0 ? inv_t : (e < 0.0 ? -inv_t : 0.0);
    } else {
      g.base[t] = 2.0 * inv_t * e;
    }
  }

  if (cfg.alpha != 0.0) {
    // dJSD/dp_hat_i = 0.5 ln(p_hat_i / m_i); chain through the softmax Jacobian
    // d p_hat_j / d y_hat_k = p_hat_j (delta_jk - p_hat_k).
    const auto ph = softmax_day(y_hat);
    const auto p = softmax_day(y);
    PriceVector dp;
    double weighted = 0.0;
    for (std::size_t i = 0; i < kHoursPerDay; ++i) {
      const double m = 0.5 * (ph[i] + p[i]);
      dp[i] = 0.5 * std::log(ph[i] / m);
      weighted += ph[i] * dp[i];
    }
    for (std::size_t k = 0; k < kHoursPerDay; ++k) {
      g.penalty[k] += cfg.alpha * ph[k] * (dp[k] - weighted);
    }
  }

  if (cfg.beta != 0.0) {
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      double d = 0.0;
      if (t > 0) d += 2.0 * (y_hat[t] - y_hat[t - 1]);
      if (t + 1 < kHoursPerDay) d -= 2.0 * (y_hat[t + 1] - y_hat[t]);
      g.penalty[t] += cfg.beta * d;
    }
  }
  return g;
}

PriceVector composite_loss_grad(std::span<const double> y_hat, std::span<const double> y,
                                const LossConfig& cfg) {
  const LossGradParts parts = composite_loss_grad_parts(y_hat, y, cfg);
  PriceVector g;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) g[t] = parts.base[t] + parts.penalty[t];
  return g;
}

BatchWeights batch_weights(std::size_t days, const LossConfig& cfg) {
  if (days == 0) throw ContractError("batch loss over zero days");
  const double inv = 1.0 / double(days);
  return {inv, cfg.literal_batch_scaling ? 1.0 : inv};
}

double batch_loss(std::span<const PriceVector> y_hat, std::span<const PriceVector> y,
                  const LossConfig& cfg) {
  if (y_hat.size() != y.size()) throw DimensionError("batch_loss", y_hat.size(), 24, y.size(), 24);
  const BatchWeights w = batch_weights(y_hat.size(), cfg);
  double base = 0.0, penalty = 0.0;
  for (std::size_t d = 0; d < y.size(); ++d) {
    require_finite(y_hat[d], "batch_loss(y_hat)");
    base += base_loss(y_hat[d], y[d], cfg.base);
    penalty += penalty_loss(y_hat[d], y[d], cfg);
  }
  return w.base * base + w.penalty * penalty;
}

}  // namespace epf
