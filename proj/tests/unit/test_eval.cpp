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

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "epf/csv.hpp"
#include "epf/data.hpp"
#include "epf/error.hpp"
#include "epf/eval.hpp"
#include "support.hpp"

using namespace epf;
namespace fs = std::filesystem;

namespace {

std::vector<PriceDay> random_days(SeededRng& rng, std::size_t n, double lo, double hi) {
  std::vector<PriceDay> out;
  const Date d0 = parse_date("2024-02-01");
  for (std::size_t d = 0; d < n; ++d) out.push_back({d0 + std::chrono::days{d}, test::random_prices(rng, lo, hi)});
  return out;
}

std::vector<SlidingWindowSample> random_samples(SeededRng& rng, std::size_t n, std::size_t m) {
  const auto days = test::random_window(rng, n, m);
  std::vector<PriceDay> prices;
  for (const auto& d : days) prices.push_back({d.date, test::random_prices(rng, -2.0, 2.0), true});
  return build_windows(days, prices, {0, false});
}

// Ridge with an unpenalized intercept, solved independently in the primal form.
Eigen::MatrixXd eigen_ridge(const std::vector<SlidingWindowSample>& s, double lambda, Eigen::RowVectorXd& x_mean,
                            Eigen::RowVectorXd& y_mean) {
  const std::size_t n = s.size();
  const std::size_t dim = flatten_window(s[0].window).size();
  Eigen::MatrixXd x(n, dim), y(n, kHoursPerDay);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = flatten_window(s[i].window);
    for (std::size_t k = 0; k < dim; ++k) x(Eigen::Index(i), Eigen::Index(k)) = f[k];
    for (std::size_t t = 0; t < kHoursPerDay; ++t) y(Eigen::Index(i), Eigen::Index(t)) = s[i].target.y[t];
  }
  x_mean = x.colwise().mean();
  y_mean = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::MatrixXd yc = y.rowwise() - y_mean;
  const Eigen::MatrixXd a =
      xc.transpose() * xc + lambda * Eigen::MatrixXd::Identity(Eigen::Index(dim), Eigen::Index(dim));
  return a.completeOrthogonalDecomposition().pseudoInverse() * (xc.transpose() * yc);
}

}  // namespace

TEST_CASE("metrics: examples") {
  SeededRng rng(1);
  const auto actual = random_days(rng, 5, 20.0, 80.0);
  const MetricsReport same = metrics(actual, actual, "same");
  CHECK(same.mse == 0.0);
  CHECK(same.mae == 0.0);
  CHECK(same.rmse == 0.0);
  CHECK(same.label == "same");

  auto off = actual;
  for (auto& d : off) {
    for (double& v : d.y) v += 2.0;
  }
  const MetricsReport r = metrics(off, actual);
  CHECK(r.mae == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.mse == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.rmse == doctest::Approx(2.0).epsilon(1e-14));
  REQUIRE(r.per_day.size() == 5);
  CHECK(r.per_day[3].date == actual[3].date);
  CHECK(r.per_day[3].mae == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("metrics: flattened pointwise definition, rmse, permutation") {
  SeededRng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto actual = random_days(rng, 7, 0.0, 100.0);
    const auto pred = random_days(rng, 7, 0.0, 100.0);
    double se = 0.0, ae = 0.0;
    for (std::size_t d = 0; d < 7; ++d) {
      for (std::size_t t = 0; t < kHoursPerDay; ++t) {
        const double e = pred[d].y[t] - actual[d].y[t];
        se += e * e;
        ae += std::abs(e);
      }
    }
    const MetricsReport r = metrics(pred, actual);
    CHECK(std::abs(r.mse - se / (7.0 * 24.0)) <= 1e-12 * r.mse);
    CHECK(std::abs(r.mae - ae / (7.0 * 24.0)) <= 1e-12 * r.mae);
    CHECK(std::abs(r.rmse * r.rmse - r.mse) <= 1e-9 * r.mse);

    std::vector<std::size_t> perm{6, 2, 4, 0, 1, 5, 3};
    std::vector<PriceDay> pp, ap;
    for (std::size_t i : perm) pp.push_back(pred[i]), ap.push_back(actual[i]);
    const MetricsReport q = metrics(pp, ap);
    CHECK(std::abs(q.mse - r.mse) <= 1e-12 * r.mse);
    CHECK(std::abs(q.mae - r.mae) <= 1e-12 * r.mae);
  }
}

TEST_CASE("metrics: denormalization scales MAE by sd and MSE by sd squared") {
  SeededRng rng(3);
  NormStats stats;
  stats.price_mean = 47.5;
  stats.price_sd = 13.25;
  auto pred = random_days(rng, 6, -2.0, 2.0);
  auto actual = random_days(rng, 6, -2.0, 2.0);
  for (auto* v : {&pred, &actual}) {
    for (auto& d : *v) d.normalized = true;
  }
  const MetricsReport norm = metrics(pred, actual);
  const MetricsReport raw = metrics(denormalize_prices(pred, stats), denormalize_prices(actual, stats));
  CHECK(std::abs(raw.mae - stats.price_sd * norm.mae) <= 1e-9 * raw.mae);
  CHECK(std::abs(raw.mse - stats.price_sd * stats.price_sd * norm.mse) <= 1e-9 * raw.mse);
}

TEST_CASE("metrics: misalignment names the first mismatched date") {
  SeededRng rng(4);
  const auto actual = random_days(rng, 5, 0.0, 1.0);
  auto pred = actual;
  pred.erase(pred.begin() + 2);
  try {
    metrics(pred, actual);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2024-02-03") != std::string::npos);
  }
  CHECK_THROWS_AS(metrics(std::vector<PriceDay>{}, std::vector<PriceDay>{}), DataError);
}

TEST_CASE("baseline_persistence") {
  SeededRng rng(5);
  const auto days = random_days(rng, 20, 0.0, 50.0);
  const PriceDay p = baseline_persistence(std::span(days.data(), 10), days[10].date);
  CHECK(p.date == days[10].date);
  CHECK(p.y == days[3].y);
  CHECK(baseline_persistence(std::span(days.data(), 10), days[10].date).y == p.y);
  CHECK_THROWS_AS(baseline_persistence(std::span(days.data(), 6), days[6].date), DataError);
  CHECK(baseline_persistence(std::span(days.data(), 7), days[7].date).y == days[0].y);

  // A gap still finds the most recent same weekday.
  std::vector<PriceDay> gappy(days.begin(), days.begin() + 5);
  CHECK(baseline_persistence(gappy, days[14].date).y == days[0].y);
}

TEST_CASE("ridge matches an independent solver") {
  SeededRng rng(6);
  // Five samples, dimension 48: the dual branch.
  const auto tiny = random_samples(rng, 5, 2);
  // Thirty samples, dimension 24: the primal branch.
  const auto tall = random_samples(rng, 30, 1);
  for (const auto* samples : {&tiny, &tall}) {
    for (double lambda : {1e-2, 1.0}) {
      const RidgeBaseline model = RidgeBaseline::fit(*samples, lambda);
      Eigen::RowVectorXd x_mean, y_mean;
      const Eigen::MatrixXd w = eigen_ridge(*samples, lambda, x_mean, y_mean);
      REQUIRE(std::size_t(w.rows()) == model.dimension());
      double worst = 0.0;
      for (Eigen::Index k = 0; k < w.rows(); ++k) {
        for (Eigen::Index t = 0; t < w.cols(); ++t) {
          worst = std::max(worst, std::abs(model.weights()(std::size_t(k), std::size_t(t)) - w(k, t)));
        }
      }
      CHECK(worst < 1e-8);
      const auto probe = random_samples(rng, 1, samples == &tiny ? 2 : 1);
      const PriceVector y = model.predict(probe[0].window);
      const auto f = flatten_window(probe[0].window);
      Eigen::RowVectorXd x(Eigen::Index(f.size()));
      for (std::size_t k = 0; k < f.size(); ++k) x(Eigen::Index(k)) = f[k];
      const Eigen::RowVectorXd expected = y_mean + (x - x_mean) * w;
      for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(std::abs(y[t] - expected(Eigen::Index(t))) < 1e-8);
    }
  }
}

TEST_CASE("ridge limits") {
  SeededRng rng(7);
  const auto samples = random_samples(rng, 8, 1);
  PriceVector mean{};
  for (const auto& s : samples) {
    for (std::size_t t = 0; t < kHoursPerDay; ++t) mean[t] += s.target.y[t] / 8.0;
  }
  const RidgeBaseline flat = RidgeBaseline::fit(samples, 1e12);
  const PriceVector y = flat.predict(random_samples(rng, 1, 1)[0].window);
  for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(std::abs(y[t] - mean[t]) < 1e-9);

  // Exactly linear targets are recovered.
  auto linear = random_samples(rng, 60, 1);
  for (auto& s : linear) {
    for (std::size_t t = 0; t < kHoursPerDay; ++t) s.target.y[t] = 3.0 - 2.0 * s.window[0].x(0, t);
  }
  const RidgeBaseline exact = RidgeBaseline::fit(linear, 1e-8);
  const auto probe = random_samples(rng, 1, 1)[0];
  const PriceVector z = exact.predict(probe.window);
  for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(std::abs(z[t] - (3.0 - 2.0 * probe.window[0].x(0, t))) < 1e-6);

  CHECK_THROWS_AS(RidgeBaseline::fit({}, 1.0), ContractError);
  CHECK_THROWS_AS(RidgeBaseline::fit(samples, -1.0), ConfigError);
  CHECK_THROWS_AS(flat.predict(random_samples(rng, 1, 2)[0].window), DimensionError);
}

TEST_CASE("comparison and residual reports") {
  SeededRng rng(8);
  const auto actual = random_days(rng, 4, 10.0, 20.0);
  const auto pred = random_days(rng, 4, 10.0, 20.0);
  const MetricsReport a = metrics(pred, actual, "a");
  const MetricsReport b = metrics(pred, actual, "b");
  const auto rows = compare_report(std::vector{a, b});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].config == "a");
  CHECK(rows[0].mse == rows[1].mse);
  CHECK(rows[0].rmse == rows[1].rmse);
  CHECK(compare_report(std::vector{a}).size() == 1);

  const MetricsReport shorter = metrics(std::span(pred).first(3), std::span(actual).first(3), "c");
  CHECK_THROWS_AS(compare_report(std::vector{a, shorter}), DataError);

  const fs::path dir = fs::temp_directory_path() / "epf_test_eval";
  fs::create_directories(dir);
  write_comparison_csv(rows, dir / "comparison.csv");
  const CsvFile cmp = read_csv(dir / "comparison.csv");
  CHECK(cmp.header == std::vector<std::string>{"config", "mse", "mae", "rmse"});
  CHECK(cmp.rows.size() == 2);

  write_residuals_csv(a, dir / "residuals.csv");
  const CsvFile res = read_csv(dir / "residuals.csv");
  CHECK(res.header == std::vector<std::string>{"date", "hour", "actual", "predicted", "residual"});
  REQUIRE(res.rows.size() == 24 * 4);
  const auto& row = res.rows[30].cells;  // day 1, hour 7
  CHECK(row[0] == format_date(actual[1].date));
  CHECK(row[1] == "7");
  CHECK(parse_double(row[4], "") == actual[1].y[6] - pred[1].y[6]);

  write_price_days(pred, dir / "pred.csv");
  const auto back = read_price_days(dir / "pred.csv");
  REQUIRE(back.size() == pred.size());
  for (std::size_t d = 0; d < pred.size(); ++d) CHECK(back[d].y == pred[d].y);
}
