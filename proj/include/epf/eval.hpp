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

// Point-wise forecast metrics over flattened hourly values, naive baselines
// and report CSVs.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "epf/data.hpp"
#include "epf/series.hpp"

namespace epf {

struct DayMetrics {
  Date date{};
  double mse = 0.0;
  double mae = 0.0;
};

struct MetricsReport {
  std::string label;
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<DayMetrics> per_day;
  std::vector<PriceDay> predicted;
  std::vector<PriceDay> actual;
};

// Pairs days by position; dates must match one to one. Throws DataError
// naming the first mismatched date.
MetricsReport metrics(std::span<const PriceDay> predicted, std::span<const PriceDay> actual,
                      std::string label = {});

// The price vector of the most recent day before `horizon` that falls on the
// same weekday. Throws DataError when there is none.
PriceDay baseline_persistence(std::span<const PriceDay> history, Date horizon);

// Ridge regression from the flattened window to the 24 target prices, with an
// unpenalized intercept.
class RidgeBaseline {
 public:
  static constexpr double kDefaultLambda = 1e-2;

  static RidgeBaseline fit(std::span<const SlidingWindowSample> samples, double lambda = kDefaultLambda);
  PriceVector predict(std::span<const FeatureDay> window) const;

  std::size_t dimension() const noexcept { return x_mean_.size(); }
  const Tensor2& weights() const noexcept { return weights_; }  // dim x 24
  const PriceVector& intercept() const noexcept { return intercept_; }

 private:
  std::vector<double> x_mean_;
  Tensor2 weights_;
  PriceVector intercept_{};
};

std::vector<double> flatten_window(std::span<const FeatureDay> window);

struct ComparisonRow {
  std::string config;
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

// One row per report. Throws DataError unless every report covers the same
// days as the first.
std::vector<ComparisonRow> compare_report(std::span<const MetricsReport> reports);

void write_comparison_csv(std::span<const ComparisonRow> rows, const std::filesystem::path& path);
// Columns date, hour, actual, predicted, residual (actual - predicted).
void write_residuals_csv(const MetricsReport& report, const std::filesystem::path& path);
void write_per_day_csv(const MetricsReport& report, const std::filesystem::path& path);

// Reads a prediction or price CSV with columns date, hour_ending, price.
std::vector<PriceDay> read_price_days(const std::filesystem::path& path);
void write_price_days(std::span<const PriceDay> days, const std::filesystem::path& path);

}  // namespace epf
