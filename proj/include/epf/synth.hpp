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

// Synthetic day-ahead market with a known price-formation process.
//
// Hourly price =  level
//               + peak profile (morning and evening bumps) x weekday factor
//               + temperature effect (same hour) + lagged daily-temperature effect
//               + renewable-share effect (negative coefficient suppresses price)
//               + gas-price effect
//               + AR(1) idiosyncratic noise.
// Latent drivers carry daily random components; every random innovation is
// scaled by noise_sd, so noise_sd = 0 yields a weekly-periodic market. At
// drift_day the price-formation coefficients shift to a second regime.
//
// Emitted columns: load, temperature, gas_price, noise_1, noise_2 (hourly,
// price file), temp_daily_mean (daily, weather file), renewable_share and
// hydro_share (hourly, fuel-mix file). noise_* are pure distractors.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "epf/data.hpp"

namespace epf {

struct PeakProfile {
  double morning = 18.0;  // amplitude of the hour-8 bump
  double evening = 30.0;  // amplitude of the hour-19 bump
  double width = 2.0;     // hours (Gaussian sd)
};

struct SynthConfig {
  std::size_t days = 150;
  std::uint64_t seed = 1;
  std::optional<std::size_t> drift_day;  // index of the first day of the new regime
  double noise_sd = 1.0;
  PeakProfile peak_profile;
  double renewable_coef = -30.0;
  double drift_strength = 1.0;
  double ar_coef = 0.6;
  double idiosyncratic_sd = 2.0;  // AR(1) innovation sd at noise_sd = 1
  std::string start_date = "2023-01-02";

  void validate() const;
};

inline constexpr std::size_t kMinSynthDays = 60;

struct SynthMarket {
  RawTable table;          // hourly records, all features inline
  std::vector<std::string> price_file_features;
  std::vector<std::string> weather_features;
  std::vector<std::string> fuel_mix_features;
};

SynthMarket synth_market(const SynthConfig& cfg);

// Writes prices.csv, weather.csv and fuel_mix.csv under dir.
CsvSources write_synth_csv(const SynthMarket& market, const std::filesystem::path& dir);

}  // namespace epf
