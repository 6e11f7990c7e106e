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

// Ingestion, cleaning, feature assembly, normalization and sliding windows.
//
// Input CSV schema (all files comma-separated with a header row):
//   prices   : date (YYYY-MM-DD), hour_ending (1-25), price, <hourly features...>
//   weather  : date, <daily fields...>                 (optional, broadcast to 24 h)
//   fuel mix : date, hour_ending, <hourly fields...>   (optional)
// Empty cells are missing values. Rows of the price file define the record
// set; the other sources are left-joined on (date, hour_ending).

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epf/series.hpp"

namespace epf {

struct RawRecord {
  Date date{};
  int hour_ending = 0;
  std::optional<double> price;
  std::vector<std::optional<double>> features;  // aligned with RawTable::feature_names
};

struct RawTable {
  std::vector<std::string> feature_names;
  std::vector<RawRecord> records;
};

struct CsvSources {
  std::filesystem::path prices;
  std::optional<std::filesystem::path> weather;
  std::optional<std::filesystem::path> fuel_mix;
};

struct CsvSchema {
  std::string date_column = "date";
  std::string hour_column = "hour_ending";
  std::string price_column = "price";
  // Feature columns to keep. Empty keeps every non-key column; otherwise
  // other columns are ignored with a warning.
  std::vector<std::string> feature_columns;
};

RawTable ingest_csv(const CsvSources& sources, const CsvSchema& schema = {});

struct CleanReport {
  std::size_t hour25_rows_removed = 0;
  std::size_t values_filled = 0;
  std::vector<std::pair<Date, std::string>> dropped_days;
};

inline constexpr std::size_t kMaxInterpolatedGap = 2;

// Removes hour-25 rows, fills missing hours/values from the neighbouring
// hours (exact mean for a single gap, linear for two), drops irrecoverable days.
RawTable clean_hours(const RawTable& table, CleanReport* report = nullptr);

inline constexpr std::size_t kTemporalFeatureCount = 7;
// Rows: hour_sin, hour_cos, dow_sin, dow_cos, month_sin, month_cos, weekend.
Tensor2 engineer_temporal(Date day);
const std::vector<std::string>& temporal_feature_names();

struct DayTable {
  std::vector<FeatureDay> days;
  std::vector<PriceDay> prices;
};

struct FeatureOptions {
  // Previous day's price at the same hour, as a feature row. The first day
  // of every contiguous run is dropped when enabled.
  bool include_price_lag = true;
  bool include_temporal = true;
  std::vector<std::string> exclude;  // raw feature names to withhold
};

// Turns a cleaned hourly table into per-day feature matrices and price days.
DayTable build_feature_days(const RawTable& clean, const FeatureOptions& options = {});

struct NormStats {
  std::vector<std::string> feature_names;  // retained features, in row order
  std::vector<double> mean;
  std::vector<double> sd;
  double price_mean = 0.0;
  double price_sd = 1.0;
  std::vector<std::string> dropped;  // zero-variance features

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

NormStats fit_normalize(std::span<const FeatureDay> train_days,
                        std::span<const PriceDay> train_prices);
// Selects the retained rows by name and z-scores them.
std::vector<FeatureDay> apply_normalize(std::span<const FeatureDay> days, const NormStats& stats);
std::vector<PriceDay> normalize_prices(std::span<const PriceDay> prices, const NormStats& stats);
std::vector<PriceDay> denormalize_prices(std::span<const PriceDay> prices, const NormStats& stats);
PriceVector denormalize(const PriceVector& y, const NormStats& stats);

struct WindowConfig {
  std::size_t lookback = 7;  // N
  // Window X_{d-N+1..d} instead of X_{d-N+1..d+1}.
  bool exclude_prediction_day_features = false;
};

struct SlidingWindowSample {
  std::vector<FeatureDay> window;
  PriceDay target;
  Date target_date() const noexcept { return target.date; }
};

// One sample per day index j >= max(first_target, N) whose window fits in
// `days`. Days before first_target only serve as window history.
std::vector<SlidingWindowSample> build_windows(std::span<const FeatureDay> days,
                                               std::span<const PriceDay> prices,
                                               const WindowConfig& cfg,
                                               std::size_t first_target = 0);

// Writes a table back out in the prices-file schema (all features inline).
void write_csv(const RawTable& table, const std::filesystem::path& path);

}  // namespace epf
