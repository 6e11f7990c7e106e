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

#include "epf/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "epf/csv.hpp"
#include "epf/log.hpp"

namespace epf {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

void accumulate_sample(const ModelParams& params, const ForwardTrace& trace,
                       const PriceVector& target, const LossConfig& loss, BatchWeights w,
                       ModelGrads& grads) {
  const LossGradParts parts = composite_loss_grad_parts(trace.prediction, target, loss);
  PriceVector g;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) g[t] = w.base * parts.base[t] + w.penalty * parts.penalty[t];
  backward_accumulate(params, trace, g, grads);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  loss.validate();
}

TrainingDiverged::TrainingDiverged(std::size_t epoch, std::size_t batch, ModelParams last_finite)
    : Error("training diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch)),
      epoch(epoch),
      batch(batch),
      last_finite(std::move(last_finite)) {}

double evaluate_loss(const ModelParams& params, std::span<const SlidingWindowSample> samples,
                     const LossConfig& loss) {
  std::vector<PriceVector> pred, target;
  pred.reserve(samples.size());
  target.reserve(samples.size());
  for (const auto& s : samples) {
    pred.push_back(predict(params, s.window));
    target.push_back(s.target.y);
  }
  return batch_loss(pred, target, loss);
}

ModelGrads batch_gradient(const ModelParams& params, std::span<const SlidingWindowSample> samples,
                          const LossConfig& loss, double* loss_out) {
  ModelGrads grads = zeros_like(params);
  const BatchWeights w = batch_weights(samples.size(), loss);
  std::vector<PriceVector> pred, target;
  for (const auto& s : samples) {
    const ForwardTrace trace = forward(params, s.window, Mode::infer);
    accumulate_sample(params, trace, s.target.y, loss, w, grads);
    pred.push_back(trace.prediction);
    target.push_back(s.target.y);
  }
  if (loss_out != nullptr) *loss_out = batch_loss(pred, target, loss);
  return grads;
}

TrainResult train(const ModelParams& model0, std::span<const SlidingWindowSample> samples,
                  std::span<const SlidingWindowSample> val_samples, const TrainConfig& cfg) {
  cfg.validate();
  model0.validate();
  if (samples.empty()) throw ContractError("train: no training samples");
  if (!val_samples.empty()) {
    for (const auto& v : val_samples) {
      for (const auto& s : samples) {
        if (s.target_date() == v.target_date()) {
          throw ContractError("train: validation day " + format_date(v.target_date()) + " also in training set");
        }
      }
    }
  }

  SeededRng shuffle_rng = SeededRng::derive(cfg.seed, kShuffleStream);
  SeededRng dropout_rng = SeededRng::derive(cfg.seed, kDropoutStream);
  OptimizerState opt = OptimizerState::create(cfg.optimizer, model0);

  TrainResult result;
  result.best = model0;
  ModelParams params = model0;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(std::span<std::size_t>(order));
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const BatchWeights w = batch_weights(end - start, cfg.loss);
      ModelGrads grads = zeros_like(params);
      std::vector<PriceVector> pred, target;
      double loss = 0.0;
      try {
        for (std::size_t k = start; k < end; ++k) {
          const SlidingWindowSample& s = samples[order[k]];
          const ForwardTrace trace = forward(params, s.window, Mode::train, &dropout_rng);
          pred.push_back(trace.prediction);
          target.push_back(s.target.y);
          accumulate_sample(params, trace, s.target.y, cfg.loss, w, grads);
        }
        loss = batch_loss(pred, target, cfg.loss);
      } catch (const DomainError&) {
        loss = std::numeric_limits<double>::quiet_NaN();
      } catch (const ContractError&) {
        loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(loss) || loss > kDivergenceLimit) {
        throw TrainingDiverged(epoch, batch_index, params);
      }
      weighted_loss += loss * double(end - start);
      auto [next, next_opt] = optimizer_step(opt, params, grads);
      params = std::move(next);
      opt = std::move(next_opt);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = weighted_loss / double(samples.size());
    rec.val_loss = val_samples.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : evaluate_loss(params, val_samples, cfg.loss);
    result.history.push_back(rec);

    const double score = val_samples.empty() ? rec.train_loss : rec.val_loss;
    if (!std::isfinite(score)) throw TrainingDiverged(epoch, batch_index, params);
    if (score < best_val - cfg.early_stop.min_delta || result.best_epoch == 0) {
      best_val = score;
      result.best = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (score < best_val) {
      // Better, but not by min_delta: keep the better parameters without resetting patience.
      best_val = score;
      result.best = params;
      result.best_epoch = epoch;
      ++since_best;
    } else {
      ++since_best;
    }
    if (since_best >= cfg.early_stop.patience_epochs && cfg.early_stop.patience_epochs > 0) {
      result.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  return result;
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "epoch,train_loss,val_loss\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.train_loss) << ','
        << (std::isnan(r.val_loss) ? std::string() : format_double(r.val_loss)) << '\n';
  }
}

}  // namespace epf
