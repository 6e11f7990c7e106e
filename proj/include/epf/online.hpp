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

// Validation-gated online adaptation and the static / dynamic comparison
// regimes. All three regimes predict each stream day before its labels are
// used for anything.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "epf/data.hpp"
#include "epf/loss.hpp"
#include "epf/model.hpp"
#include "epf/trainer.hpp"

namespace epf {

struct FreezeMask {
  bool layer1 = true;
  bool layer2 = false;
  bool dense = false;

  bool frozen(LayerId id) const noexcept {
    switch (id) {
      case LayerId::layer1: return layer1;
      case LayerId::layer2: return layer2;
      case LayerId::dense: return dense;
    }
    return false;
  }
};

enum class ValidationPolicy { fixed, rolling };

struct OnlineConfig {
  double eta = 0.01;
  double delta = 0.0;  // absolute margin on the validation loss
  FreezeMask freeze;
  ValidationPolicy validation = ValidationPolicy::fixed;
  std::size_t rolling_window_days = 14;
  std::size_t batch_days = 1;

  void validate() const;
};

// S, V and the ordered stream B. Samples carry their own windows.
struct DatasetSplit {
  std::vector<SlidingWindowSample> train;
  std::vector<SlidingWindowSample> validation;
  std::vector<SlidingWindowSample> stream;

  // Throws ContractError unless every part is date-ordered and
  // max(train) < min(validation) <= min(stream).
  void validate() const;
};

struct AuditRecord {
  Date batch_date{};  // first day of the batch
  std::size_t batch_days = 0;
  double batch_loss = std::numeric_limits<double>::quiet_NaN();
  double val_before = std::numeric_limits<double>::quiet_NaN();
  double val_after = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  bool skipped = false;
  std::string error;
  double delta = 0.0;
  double eta = 0.0;
  double param_delta_norm = 0.0;  // norm of the applied change, 0 when rejected
  std::optional<Date> latest_label;  // newest target date read by this step
};

struct StepResult {
  ModelParams params;
  AuditRecord audit;
};

// One gate decision. Dropout is off; the candidate is a single SGD step on
// the batch loss with frozen-layer gradients zeroed.
StepResult online_step(const ModelParams& theta_star, std::span<const SlidingWindowSample> batch,
                       std::span<const SlidingWindowSample> val, const OnlineConfig& cfg,
                       const LossConfig& loss);

struct Prediction {
  PriceDay day;  // normalized units
  // Newest label date that influenced the parameters used for this prediction.
  std::optional<Date> label_horizon;
};

struct OnlineResult {
  ModelParams final_params;
  std::vector<AuditRecord> audit;
  std::vector<Prediction> predictions;
};

OnlineResult run_online(const ModelParams& model0, const DatasetSplit& split, const OnlineConfig& cfg,
                        const LossConfig& loss);

std::vector<Prediction> run_static(const ModelParams& model0, const DatasetSplit& split);

struct DynamicConfig {
  ModelSpec spec;
  TrainConfig train;  // epochs == 0 disables retraining
  std::size_t val_days = 14;
};

// Before each stream day j, trains a fresh model (seed derived from
// train.seed and j) on every sample dated before the day, holding out the
// most recent val_days as validation, then predicts day j.
std::vector<Prediction> run_dynamic(const DynamicConfig& cfg, const DatasetSplit& split);

// The initial parameters run_dynamic uses for stream day j.
ModelParams dynamic_init(const DynamicConfig& cfg, std::size_t j);

void write_audit_csv(std::span<const AuditRecord> audit, const std::filesystem::path& path);

}  // namespace epf
