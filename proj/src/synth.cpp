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

#include "epf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/rng.hpp"

namespace epf {

namespace {

constexpr double kBaseTemperature = 15.0;
constexpr double kBaseGas = 3.0;

struct Regime {
  double level;
  double morning;
  double evening;
  double temp_coef;
  double temp_lag_coef;
  double renewable_coef;
  double gas_coef;
};

Regime base_regime(const SynthConfig& cfg) {
  return {40.0, cfg.peak_profile.morning, cfg.peak_profile.evening, 1.2, 1.5, cfg.renewable_coef, 8.0};
}

Regime drifted_regime(const SynthConfig& cfg) {
  const double s = cfg.drift_strength;
  Regime r = base_regime(cfg);
  r.level += 15.0 * s;
  r.morning *= 1.0 - 0.4 * s;
  r.evening *= 1.0 + 0.6 * s;
  r.renewable_coef *= 1.0 + 0.8 * s;
  r.temp_lag_coef *= 1.0 - 2.0 * s;
  return r;
}

double bump(double t, double centre, double width) {
  const double z = (t - centre) / width;
  return std::exp(-0.5 * z * z);
}

double solar_shape(std::size_t t) {
  if (t < 6 || t > 18) return 0.0;
  return std::sin(std::numbers::pi * double(t - 6) / 12.0);
}

}  // namespace

void SynthConfig::validate() const {
  if (days < kMinSynthDays) {
    throw ConfigError("synth: days must be >= " + std::to_string(kMinSynthDays) + " (got " +
                      std::to_string(days) + ")");
  }
  if (drift_day && *drift_day >= days) throw ConfigError("synth: drift_day beyond the generated range");
  if (!(noise_sd >= 0.0)) throw ConfigError("synth: noise_sd must be >= 0");
  if (!(peak_profile.width > 0.0)) throw ConfigError("synth: peak width must be > 0");
  if (!(std::abs(ar_coef) < 1.0)) throw ConfigError("synth: |ar_coef| must be < 1");
  parse_date(start_date);
}

SynthMarket synth_market(const SynthConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);
  const double sigma = cfg.noise_sd;
  const Date start = parse_date(cfg.start_date);

  SynthMarket m;
  m.price_file_features = {"load", "temperature", "gas_price", "noise_1", "noise_2"};
  m.weather_features = {"temp_daily_mean"};
  m.fuel_mix_features = {"renewable_share", "hydro_share"};
  m.table.feature_names = m.price_file_features;
  m.table.feature_names.insert(m.table.feature_names.end(), m.weather_features.begin(), m.weather_features.end());
  m.table.feature_names.insert(m.table.feature_names.end(), m.fuel_mix_features.begin(), m.fuel_mix_features.end());
  m.table.records.reserve(cfg.days * kHoursPerDay);

  const Regime before = base_regime(cfg);
  const Regime after = drifted_regime(cfg);
  double temp_anomaly = 0.0;
  double prev_temp_anomaly = 0.0;
  double gas = kBaseGas;
  double eps = 0.0;

  for (std::size_t k = 0; k < cfg.days; ++k) {
    const Date date = start + std::chrono::days{k};
    const bool weekend = iso_weekday_index(date) >= 5;
    const Regime& r = (cfg.drift_day && k >= *cfg.drift_day) ? after : before;

    prev_temp_anomaly = temp_anomaly;
    temp_anomaly = 0.7 * temp_anomaly + 3.0 * sigma * rng.normal();
    const double solar = std::clamp(0.6 + 0.3 * sigma * rng.normal(), 0.05, 1.0);
    const double wind = std::clamp(0.15 + 0.08 * sigma * rng.normal(), 0.0, 0.4);
    const double hydro = std::clamp(0.1 + 0.03 * sigma * rng.normal(), 0.0, 0.3);
    gas = std::max(1.0, gas + 0.08 * sigma * rng.normal());

    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      const double td = double(t);
      const double temperature =
          kBaseTemperature + temp_anomaly + 5.0 * std::sin(2.0 * std::numbers::pi * (td - 9.0) / 24.0);
      const double renewable = solar * solar_shape(t) + wind;
      const double load_shape = 0.6 * bump(td, 9.0, 3.0) + bump(td, 19.0, 3.0);
      const double load = 1000.0 * (0.7 + 0.3 * load_shape) * (weekend ? 0.85 : 1.0) +
                           12.0 * std::abs(temperature - 18.0) + 20.0 * sigma * rng.normal();
      const double noise_1 = rng.normal();
      const double noise_2 = rng.normal();
      eps = cfg.ar_coef * eps + cfg.idiosyncratic_sd * sigma * rng.normal();

      const double peaks = r.morning * bump(td, 8.0, cfg.peak_profile.width) +
                           r.evening * bump(td, 19.0, cfg.peak_profile.width);
      const double price = r.level + peaks * (weekend ? 0.7 : 1.0) +
                           r.temp_coef * (temperature - kBaseTemperature) +
                           r.temp_lag_coef * prev_temp_anomaly + r.renewable_coef * renewable +
                           r.gas_coef * (gas - kBaseGas) + eps;

      RawRecord rec;
      rec.date = date;
      rec.hour_ending = int(t) + 1;
      rec.price = price;
      rec.features = {load,      temperature, gas, noise_1, noise_2, kBaseTemperature + temp_anomaly,
                      renewable, hydro};
      m.table.records.push_back(std::move(rec));
    }
  }
  return m;
}

CsvSources write_synth_csv(const SynthMarket& market, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  CsvSources src{dir / "prices.csv", dir / "weather.csv", dir / "fuel_mix.csv"};
  const std::size_t n_price = market.price_file_features.size();
  const std::size_t n_weather = market.weather_features.size();

  std::ofstream prices(src.prices, std::ios::binary);
  std::ofstream weather(*src.weather, std::ios::binary);
  std::ofstream fuel(*src.fuel_mix, std::ios::binary);
  if (!prices || !weather || !fuel) throw DataError("cannot write synthetic CSVs under '" + dir.string() + "'");

  prices << "date,hour_ending,price";
  for (const auto& n : market.price_file_features) prices << ',' << n;
  prices << '\n';
  weather << "date";
  for (const auto& n : market.weather_features) weather << ',' << n;
  weather << '\n';
  fuel << "date,hour_ending";
  for (const auto& n : market.fuel_mix_features) fuel << ',' << n;
  fuel << '\n';

  for (const RawRecord& r : market.table.records) {
    const std::string date = format_date(r.date);
    prices << date << ',' << r.hour_ending << ',' << format_double(*r.price);
    for (std::size_t f = 0; f < n_price; ++f) prices << ',' << format_double(*r.features[f]);
    prices << '\n';
    if (r.hour_ending == 1) {
      weather << date;
      for (std::size_t f = 0; f < n_weather; ++f) weather << ',' << format_double(*r.features[n_price + f]);
      weather << '\n';
    }
    fuel << date << ',' << r.hour_ending;
    for (std::size_t f = n_price + n_weather; f < r.features.size(); ++f) fuel << ',' << format_double(*r.features[f]);
    fuel << '\n';
  }
  if (!prices || !weather || !fuel) throw DataError("write failed under '" + dir.string() + "'");
  return src;
}

}  // namespace epf
