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

// End-to-end helpers shared by the command-line tool and the experiments:
// cleaned table -> normalized windows -> S / V / stream split, and
// denormalized reports for the three regimes.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "epf/data.hpp"
#include "epf/eval.hpp"
#include "epf/online.hpp"
#include "epf/trainer.hpp"

namespace epf {

struct PipelineConfig {
  FeatureOptions features;
  WindowConfig window;
  // Feature days (after cleaning and lag alignment) in the training period.
  // Normalization is fitted on them; samples targeting them form S and V.
  std::size_t train_days = 60;
  std::size_t val_days = 14;  // newest training-period samples used as V
};

struct PreparedData {
  NormStats stats;
  DatasetSplit split;
  std::map<Date, PriceVector> raw_prices;  // original units, every feature day
  std::size_t input_size = 0;
};

// Windows are built per contiguous run of days, so a dropped day only costs
// the samples whose window would span it.
std::vector<SlidingWindowSample> build_windows_by_run(std::span<const FeatureDay> days,
                                                      std::span<const PriceDay> prices,
                                                      const WindowConfig& cfg);

PreparedData prepare_data(const RawTable& clean, const PipelineConfig& cfg);

// Seeded initialisation followed by offline training on S with V for early stopping.
TrainResult train_on_split(const PreparedData& data, const ModelSpec& spec, const TrainConfig& cfg);
ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed);

// Denormalized predictions paired with the raw prices of the same days.
MetricsReport regime_report(std::span<const Prediction> predictions, const PreparedData& data,
                            const std::string& label);

}  // namespace epf
