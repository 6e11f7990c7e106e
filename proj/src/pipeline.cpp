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

#include "epf/pipeline.hpp"

#include "epf/error.hpp"
#include "epf/log.hpp"

namespace epf {

namespace {

constexpr std::uint64_t kInitStream = 3;

}  // namespace

std::vector<SlidingWindowSample> build_windows_by_run(std::span<const FeatureDay> days,
                                                      std::span<const PriceDay> prices,
                                                      const WindowConfig& cfg) {
  std::vector<SlidingWindowSample> out;
  std::size_t start = 0;
  for (std::size_t j = 1; j <= days.size(); ++j) {
    if (j == days.size() || days[j].date != days[j - 1].date + std::chrono::days{1}) {
      auto run = build_windows(days.subspan(start, j - start), prices.subspan(start, j - start), cfg);
      out.insert(out.end(), std::make_move_iterator(run.begin()), std::make_move_iterator(run.end()));
      start = j;
    }
  }
  return out;
}

PreparedData prepare_data(const RawTable& clean, const PipelineConfig& cfg) {
  const DayTable table = build_feature_days(clean, cfg.features);
  if (table.days.size() <= cfg.train_days) {
    throw DataError("prepare: " + std::to_string(table.days.size()) + " usable days, need more than the " +
                    std::to_string(cfg.train_days) + " training days");
  }
  if (cfg.train_days == 0) throw ConfigError("prepare: train_days must be >= 1");

  PreparedData out;
  for (const auto& p : table.prices) out.raw_prices[p.date] = p.y;
  const std::span<const FeatureDay> train_days(table.days.data(), cfg.train_days);
  const std::span<const PriceDay> train_prices(table.prices.data(), cfg.train_days);
  out.stats = fit_normalize(train_days, train_prices);
  out.input_size = out.stats.feature_names.size();

  const std::vector<FeatureDay> days = apply_normalize(table.days, out.stats);
  const std::vector<PriceDay> prices = normalize_prices(table.prices, out.stats);
  std::vector<SlidingWindowSample> samples = build_windows_by_run(days, prices, cfg.window);

  const Date boundary = table.days[cfg.train_days].date;  // first stream day
  std::vector<SlidingWindowSample> period;
  for (auto& s : samples) {
    if (s.target_date() < boundary) {
      period.push_back(std::move(s));
    } else {
      out.split.stream.push_back(std::move(s));
    }
  }
  if (period.size() <= cfg.val_days) {
    throw DataError("prepare: " + std::to_string(period.size()) + " training samples cannot spare " +
                    std::to_string(cfg.val_days) + " for validation");
  }
  const std::size_t n_train = period.size() - cfg.val_days;
  out.split.train.assign(std::make_move_iterator(period.begin()),
                         std::make_move_iterator(period.begin() + std::ptrdiff_t(n_train)));
  out.split.validation.assign(std::make_move_iterator(period.begin() + std::ptrdiff_t(n_train)),
                              std::make_move_iterator(period.end()));
  out.split.validate();
  return out;
}

ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed) {
  SeededRng rng = SeededRng::derive(seed, kInitStream);
  return init_params(spec, rng);
}

TrainResult train_on_split(const PreparedData& data, const ModelSpec& spec, const TrainConfig& cfg) {
  ModelSpec s = spec;
  s.input_size = data.input_size;
  return train(initial_params(s, cfg.seed), data.split.train, data.split.validation, cfg);
}

MetricsReport regime_report(std::span<const Prediction> predictions, const PreparedData& data,
                            const std::string& label) {
  std::vector<PriceDay> pred, actual;
  for (const auto& p : predictions) {
    auto it = data.raw_prices.find(p.day.date);
    if (it == data.raw_prices.end()) throw DataError("report: no actual prices for " + format_date(p.day.date));
    pred.push_back({p.day.date, p.day.normalized ? denormalize(p.day.y, data.stats) : p.day.y, false});
    actual.push_back({p.day.date, it->second, false});
  }
  return metrics(pred, actual, label);
}

}  // namespace epf
