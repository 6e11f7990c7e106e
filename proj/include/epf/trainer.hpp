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

#include <cstdint>
#include <span>
#include <vector>

#include "epf/data.hpp"
#include "epf/error.hpp"
#include "epf/loss.hpp"
#include "epf/model.hpp"
#include "epf/optimizer.hpp"

namespace epf {

struct EarlyStopConfig {
  std::size_t patience_epochs = 10;
  double min_delta = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  LossConfig loss;
  EarlyStopConfig early_stop;
  bool shuffle = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when no validation set was given

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  ModelParams best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

// Raised when the loss becomes non-finite or exceeds kDivergenceLimit.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, ModelParams last_finite);
  std::size_t epoch;
  std::size_t batch;
  ModelParams last_finite;
};

inline constexpr double kDivergenceLimit = 1e6;

// Composite loss of a model over samples, inference mode, batch-aggregated.
double evaluate_loss(const ModelParams& params, std::span<const SlidingWindowSample> samples,
                     const LossConfig& loss);

// Sum over samples of the weighted loss gradient, inference mode. Returns the
// batch loss through `loss_out` when non-null.
ModelGrads batch_gradient(const ModelParams& params, std::span<const SlidingWindowSample> samples,
                          const LossConfig& loss, double* loss_out = nullptr);

// Mini-batch training on the composite loss, keeping the parameters with the
// best validation loss.
TrainResult train(const ModelParams& model0, std::span<const SlidingWindowSample> samples,
                  std::span<const SlidingWindowSample> val_samples, const TrainConfig& cfg);

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

}  // namespace epf
