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

#include <bit>
#include <cmath>
#include <filesystem>

#include "epf/data.hpp"
#include "epf/error.hpp"
#include "epf/eval.hpp"
#include "epf/synth.hpp"

using namespace epf;

namespace {

std::vector<PriceDay> daily_prices(const RawTable& t) {
  std::vector<PriceDay> out;
  for (const auto& r : t.records) {
    if (r.hour_ending == 1) out.push_back({r.date, {}});
    out.back().y[std::size_t(r.hour_ending - 1)] = *r.price;
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::size_t column(const RawTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.feature_names.size(); ++i) {
    if (t.feature_names[i] == name) return i;
  }
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_CASE("synth_market: same seed gives bit-identical output") {
  SynthConfig cfg;
  cfg.days = 70;
  cfg.seed = 42;
  cfg.drift_day = 40;
  const SynthMarket a = synth_market(cfg), b = synth_market(cfg);
  REQUIRE(a.table.records.size() == 70 * 24);
  for (std::size_t i = 0; i < a.table.records.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(*a.table.records[i].price) ==
          std::bit_cast<std::uint64_t>(*b.table.records[i].price));
    CHECK(a.table.records[i].features == b.table.records[i].features);
  }
  cfg.seed = 43;
  CHECK(*synth_market(cfg).table.records[5].price != *a.table.records[5].price);
  CHECK(a.table.feature_names.size() ==
        a.price_file_features.size() + a.weather_features.size() + a.fuel_mix_features.size());
}

TEST_CASE("synth_market: noise 0 and no drift is weekly periodic") {
  SynthConfig cfg;
  cfg.days = 63;
  cfg.noise_sd = 0.0;
  const auto prices = daily_prices(synth_market(cfg).table);
  for (std::size_t d = 7; d < prices.size(); ++d) CHECK(prices[d].y == prices[d - 7].y);

  // Lag-7 persistence is then exact.
  std::vector<PriceDay> predicted, actual;
  for (std::size_t d = 7; d < prices.size(); ++d) {
    predicted.push_back(baseline_persistence(std::span(prices.data(), d), prices[d].date));
    actual.push_back(prices[d]);
  }
  CHECK(metrics(predicted, actual).mse == 0.0);
}

TEST_CASE("synth_market: renewable share suppresses price") {
  SynthConfig cfg;
  cfg.days = 90;
  cfg.seed = 3;
  const SynthMarket m = synth_market(cfg);
  const std::size_t col = column(m.table, "renewable_share");
  std::vector<double> share, price;
  for (const auto& r : m.table.records) {
    share.push_back(*r.features[col]);
    price.push_back(*r.price);
  }
  CHECK(pearson(share, price) < 0.0);
}

TEST_CASE("synth_market: drift separates the regimes for a linear model") {
  SynthConfig cfg;
  cfg.days = 150;
  cfg.seed = 5;
  cfg.drift_day = 80;
  const SynthMarket m = synth_market(cfg);
  FeatureOptions fo;
  const DayTable table = build_feature_days(clean_hours(m.table), fo);
  const NormStats stats = fit_normalize(table.days, table.prices);
  const auto days = apply_normalize(table.days, stats);
  const auto prices = normalize_prices(table.prices, stats);
  const auto samples = build_windows(days, prices, {1, false});

  const Date drift = parse_date(cfg.start_date) + std::chrono::days{*cfg.drift_day};
  const Date test_from = parse_date(cfg.start_date) + std::chrono::days{cfg.days - 20};
  std::vector<SlidingWindowSample> pre, post, test;
  for (const auto& s : samples) {
    if (s.target_date() < drift) {
      pre.push_back(s);
    } else if (s.target_date() < test_from) {
      post.push_back(s);
    } else {
      test.push_back(s);
    }
  }
  const auto score = [&](const RidgeBaseline& model) {
    std::vector<PriceDay> pred, actual;
    for (const auto& s : test) {
      pred.push_back({s.target_date(), model.predict(s.window), true});
      actual.push_back(s.target);
    }
    return metrics(pred, actual).mse;
  };
  const double pre_mse = score(RidgeBaseline::fit(pre, 1.0));
  const double post_mse = score(RidgeBaseline::fit(post, 1.0));
  MESSAGE("pre-drift fit " << pre_mse << ", post-drift fit " << post_mse);
  CHECK(pre_mse > post_mse);
}

TEST_CASE("synth_market: validation and CSV export") {
  SynthConfig cfg;
  cfg.days = 10;
  CHECK_THROWS_AS(synth_market(cfg), ConfigError);
  cfg.days = 60;
  cfg.drift_day = 60;
  CHECK_THROWS_AS(synth_market(cfg), ConfigError);
  cfg.drift_day.reset();
  cfg.noise_sd = -1.0;
  CHECK_THROWS_AS(synth_market(cfg), ConfigError);

  cfg.noise_sd = 1.0;
  const SynthMarket m = synth_market(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "epf_test_synth";
  std::filesystem::remove_all(dir);
  const RawTable back = ingest_csv(write_synth_csv(m, dir));
  CHECK(back.feature_names == m.table.feature_names);
  REQUIRE(back.records.size() == m.table.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(*back.records[i].price == *m.table.records[i].price);
    CHECK(back.records[i].features == m.table.records[i].features);
  }
}
