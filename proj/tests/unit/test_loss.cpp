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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epf/error.hpp"
#include "epf/loss.hpp"
#include "epf/numeric.hpp"
#include "support.hpp"

using namespace epf;

namespace {

PriceVector constant(double c) {
  PriceVector v;
  v.fill(c);
  return v;
}

std::vector<double> random_probs(SeededRng& rng, std::size_t n) {
  std::vector<double> logits(n);
  for (double& v : logits) v = rng.uniform(-3.0, 3.0);
  return softmax(logits);
}

}  // namespace

TEST_CASE("softmax_day") {
  for (double p : softmax_day(constant(3.7))) CHECK(std::abs(p - 1.0 / 24.0) < 1e-15);

  SeededRng rng(1);
  const PriceVector y = test::random_prices(rng, -5.0, 5.0);
  PriceVector shifted = y;
  for (double& v : shifted) v += 123.0;
  const PriceVector a = softmax_day(y), b = softmax_day(shifted);
  for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(std::abs(a[t] - b[t]) < 1e-14);

  PriceVector one_hot{};
  one_hot[0] = 1.0;
  const PriceVector p = softmax_day(one_hot);
  const double e = std::numbers::e;
  CHECK(std::abs(p[0] - e / (e + 23.0)) < 1e-15);
  CHECK(std::abs(p[0] - 0.10570) < 1e-5);
  for (std::size_t t = 1; t < kHoursPerDay; ++t) CHECK(std::abs(p[t] - 1.0 / (e + 23.0)) < 1e-15);
  CHECK(std::abs(p[1] - 0.03888) < 1e-5);

  PriceVector bad{};
  bad[4] = std::nan("");
  CHECK_THROWS_AS(softmax_day(bad), DomainError);

  PriceVector large{};
  large[3] = 1000.0;
  const PriceVector q = softmax_day(large);
  CHECK(std::abs(q[3] - 1.0) < 1e-15);
}

TEST_CASE("kl_div") {
  SeededRng rng(2);
  const auto p = random_probs(rng, 24);
  CHECK(kl_div(p, p) == 0.0);
  const std::vector<double> uniform(24, 1.0 / 24.0);
  CHECK(kl_div(uniform, p) + kl_div(p, uniform) > 0.0);

  // 0.8 ln 1.6 + 0.2 ln 0.4
  CHECK(std::abs(kl_div(std::vector{0.8, 0.2}, std::vector{0.5, 0.5}) - 0.19274) < 1e-5);
  CHECK(std::abs(kl_div(std::vector{0.8, 0.2}, std::vector{0.5, 0.5}) -
                 (0.8 * std::log(1.6) + 0.2 * std::log(0.4))) < 1e-15);

  CHECK_THROWS_AS(kl_div(std::vector{1.0, 0.0}, std::vector{0.5, 0.5}), ContractError);
  CHECK_THROWS_AS(kl_div(std::vector{0.6, 0.6}, std::vector{0.5, 0.5}), ContractError);
}

TEST_CASE("jsd properties") {
  SeededRng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_probs(rng, 24);
    const auto q = random_probs(rng, 24);
    const double d = jsd(p, q);
    CHECK(d == jsd(q, p));
    CHECK(d >= 0.0);
    CHECK(d <= std::numbers::ln2);
    CHECK(std::abs(jsd(p, p)) <= 1e-12);
    CHECK(d > 1e-12);
  }
  // Mass 1 - eps on swapped supports: the gap to ln 2 is O(eps ln(1/eps)).
  double prev = 0.0;
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const double d = jsd(std::vector{1.0 - eps, eps}, std::vector{eps, 1.0 - eps});
    CHECK(d < std::numbers::ln2);
    CHECK(d > prev);
    CHECK(std::numbers::ln2 - d < 2.0 * eps * (1.0 - std::log(eps)));
    prev = d;
  }
}

TEST_CASE("jsd of softmax is shift invariant") {
  SeededRng rng(4);
  for (int i = 0; i < 50; ++i) {
    const PriceVector a = test::random_prices(rng, -2.0, 2.0);
    const PriceVector b = test::random_prices(rng, -2.0, 2.0);
    const double c = rng.uniform(-50.0, 50.0);
    PriceVector ac = a, bc = b;
    for (double& v : ac) v += c;
    for (double& v : bc) v += c;
    CHECK(std::abs(jsd(softmax_day(ac), softmax_day(bc)) - jsd(softmax_day(a), softmax_day(b))) < 1e-14);
  }
}

TEST_CASE("smoothness") {
  CHECK(smoothness(constant(4.0)) == 0.0);
  PriceVector y = constant(2.0);
  y[0] = 1.0;
  y[1] = 3.0;
  CHECK(smoothness(y) == 5.0);

  SeededRng rng(5);
  for (int i = 0; i < 50; ++i) {
    const PriceVector v = test::random_prices(rng);
    PriceVector r = v;
    std::reverse(r.begin(), r.end());
    CHECK(smoothness(r) == smoothness(v));
    PriceVector s = v;
    for (double& x : s) x += 0.5;
    CHECK(std::abs(smoothness(s) - smoothness(v)) < 1e-12);
  }
}

TEST_CASE("composite loss reductions") {
  SeededRng rng(6);
  for (int i = 0; i < 50; ++i) {
    const PriceVector yh = test::random_prices(rng), y = test::random_prices(rng);
    double mae = 0.0, mse = 0.0;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      mae += std::abs(yh[t] - y[t]);
      mse += (yh[t] - y[t]) * (yh[t] - y[t]);
    }
    mae /= 24.0;
    mse /= 24.0;
    CHECK(composite_loss(yh, y, {BaseLoss::mae, 0.0, 0.0}) == mae);
    CHECK(composite_loss(yh, y, {BaseLoss::mse, 0.0, 0.0}) == mse);

    const LossConfig cfg{BaseLoss::mae, 1.0, 0.01};
    CHECK(std::abs(composite_loss(y, y, cfg) - 0.01 * smoothness(y)) < 1e-15);

    double prev = -1.0;
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
      const double v = composite_loss(yh, y, {BaseLoss::mae, alpha, 0.01});
      CHECK(v >= prev);
      prev = v;
    }
    prev = -1.0;
    for (double beta : {0.0, 0.001, 0.1, 1.0}) {
      const double v = composite_loss(yh, y, {BaseLoss::mae, 1.0, beta});
      CHECK(v >= prev);
      prev = v;
    }
  }
  CHECK_THROWS_AS((LossConfig{BaseLoss::mae, -1.0, 0.0}.validate()), ConfigError);
}

TEST_CASE("composite loss gradient: closed forms") {
  SeededRng rng(7);
  const PriceVector y = test::random_prices(rng);
  for (double g : composite_loss_grad(y, y, {BaseLoss::mae, 1.0, 0.0})) CHECK(g == 0.0);
  for (double g : composite_loss_grad(y, y, {BaseLoss::mse, 2.0, 0.0})) CHECK(std::abs(g) < 1e-17);

  const PriceVector yh = test::random_prices(rng);
  const PriceVector g = composite_loss_grad(yh, y, {BaseLoss::mse, 0.0, 0.0});
  for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(std::abs(g[t] - (2.0 / 24.0) * (yh[t] - y[t])) < 1e-17);

  // MAE tie: subgradient 0.
  PriceVector tie = yh;
  tie[5] = y[5];
  CHECK(composite_loss_grad(tie, y, {BaseLoss::mae, 0.0, 0.0})[5] == 0.0);
}

TEST_CASE("composite loss gradient matches finite differences") {
  SeededRng rng(8);
  int instances = 0;
  double worst = 0.0;
  while (instances < 200) {
    const PriceVector yh = test::random_prices(rng, -2.0, 2.0);
    const PriceVector y = test::random_prices(rng, -2.0, 2.0);
    const LossConfig cfg{rng.uniform() < 0.5 ? BaseLoss::mae : BaseLoss::mse, rng.uniform(0.0, 2.0),
                         rng.uniform(0.0, 0.2)};
    // Keep the central-difference stencil away from MAE kinks.
    bool near_kink = false;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) near_kink |= std::abs(yh[t] - y[t]) < 1e-4;
    if (near_kink && cfg.base == BaseLoss::mae) continue;

    const PriceVector analytic = composite_loss_grad(yh, y, cfg);
    auto f = [&](std::span<const double> x) { return composite_loss(x, y, cfg); };
    const auto numeric = finite_diff_grad(f, yh);
    worst = std::max(worst, test::max_rel_error(analytic, numeric));
    ++instances;
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-6);
}

TEST_CASE("batch weights and batch loss") {
  SeededRng rng(9);
  std::vector<PriceVector> yh, y;
  for (int i = 0; i < 5; ++i) {
    yh.push_back(test::random_prices(rng));
    y.push_back(test::random_prices(rng));
  }
  const LossConfig cfg{BaseLoss::mae, 1.0, 0.01};
  double mean = 0.0;
  for (int i = 0; i < 5; ++i) mean += composite_loss(yh[i], y[i], cfg);
  mean /= 5.0;
  CHECK(std::abs(batch_loss(yh, y, cfg) - mean) < 1e-14);

  LossConfig literal = cfg;
  literal.literal_batch_scaling = true;
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    expected += base_loss(yh[i], y[i], BaseLoss::mae) / 5.0 + penalty_loss(yh[i], y[i], cfg);
  }
  CHECK(std::abs(batch_loss(yh, y, literal) - expected) < 1e-14);
  const BatchWeights w = batch_weights(5, literal);
  CHECK(w.base == 1.0 / 5.0);
  CHECK(w.penalty == 1.0);
}
