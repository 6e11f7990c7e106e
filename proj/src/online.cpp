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

#include "epf/online.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/log.hpp"
#include "epf/numeric.hpp"
#include "epf/optimizer.hpp"

namespace epf {

namespace {

void require_ordered(std::span<const SlidingWindowSample> s, const char* what) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i - 1].target_date() < s[i].target_date())) {
      throw ContractError(std::string("split: ") + what + " not strictly date-ordered at " +
                          format_date(s[i].target_date()));
    }
  }
}

std::optional<Date> latest_of(std::optional<Date> a, std::span<const SlidingWindowSample> s) {
  for (const auto& x : s) {
    if (!a || *a < x.target_date()) a = x.target_date();
  }
  return a;
}

double param_distance(const ModelParams& a, const ModelParams& b) {
  const std::vector<double> fa = flatten(a);
  const std::vector<double> fb = flatten(b);
  std::vector<double> d(fa.size());
  for (std::size_t i = 0; i < fa.size(); ++i) d[i] = fa[i] - fb[i];
  return l2_norm(d);
}

// Rolling V: the newest `window` labelled samples dated strictly before `before`.
std::vector<SlidingWindowSample> rolling_validation(const std::vector<const SlidingWindowSample*>& labelled,
                                                    Date before, std::size_t window) {
  std::vector<SlidingWindowSample> v;
  std::size_t end = labelled.size();
  while (end > 0 && !(labelled[end - 1]->target_date() < before)) --end;
  const std::size_t begin = end > window ? end - window : 0;
  for (std::size_t i = begin; i < end; ++i) v.push_back(*labelled[i]);
  return v;
}

}  // namespace

void OnlineConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("online: eta must be finite and >= 0");
  if (!(delta >= 0.0)) throw ConfigError("online: delta must be >= 0");
  if (freeze.layer1 && freeze.layer2 && freeze.dense) throw ConfigError("online: every layer is frozen");
  if (batch_days < 1) throw ConfigError("online: batch_days must be >= 1");
  if (validation == ValidationPolicy::rolling && rolling_window_days < 1) {
    throw ConfigError("online: rolling window must be >= 1 day");
  }
}

void DatasetSplit::validate() const {
  require_ordered(train, "train");
  require_ordered(validation, "validation");
  require_ordered(stream, "stream");
  if (!train.empty() && !validation.empty() && !(train.back().target_date() < validation.front().target_date())) {
    throw ContractError("split: validation must follow the training days");
  }
  if (!validation.empty() && !stream.empty() && stream.front().target_date() < validation.back().target_date()) {
    throw ContractError("split: stream starts before the validation days end");
  }
  if (validation.empty() && !train.empty() && !stream.empty() &&
      !(train.back().target_date() < stream.front().target_date())) {
    throw ContractError("split: stream overlaps the training days");
  }
}

StepResult online_step(const ModelParams& theta_star, std::span<const SlidingWindowSample> batch,
                       std::span<const SlidingWindowSample> val, const OnlineConfig& cfg,
                       const LossConfig& loss) {
  cfg.validate();
  StepResult out{theta_star, {}};
  AuditRecord& rec = out.audit;
  rec.delta = cfg.delta;
  rec.eta = cfg.eta;
  rec.batch_days = batch.size();
  if (!batch.empty()) rec.batch_date = batch.front().target_date();
  rec.latest_label = latest_of(latest_of(std::nullopt, batch), val);

  try {
    if (batch.empty()) throw ContractError("online_step: empty batch");
    if (val.empty()) throw ContractError("online_step: empty validation set");

    // Predict the batch with the current model and take the loss and gradient.
    ModelGrads grads = batch_gradient(theta_star, batch, loss, &rec.batch_loss);
    for (auto& v : tensors(grads)) {
      if (cfg.freeze.frozen(v.layer)) std::fill(v.tensor->flat().begin(), v.tensor->flat().end(), 0.0);
    }
    ModelParams candidate = sgd_step(theta_star, grads, cfg.eta);

    rec.val_before = evaluate_loss(theta_star, val, loss);
    rec.val_after = evaluate_loss(candidate, val, loss);
    rec.accepted = rec.val_before - rec.val_after > cfg.delta;
    if (rec.accepted) {
      rec.param_delta_norm = param_distance(candidate, theta_star);
      out.params = std::move(candidate);
    }
  } catch (const Error& e) {
    rec.skipped = true;
    rec.accepted = false;
    rec.error = e.what();
    out.params = theta_star;
    log_warning("online step " + format_date(rec.batch_date) + " skipped: " + rec.error);
  }
  return out;
}

OnlineResult run_online(const ModelParams& model0, const DatasetSplit& split, const OnlineConfig& cfg,
                        const LossConfig& loss) {
  cfg.validate();
  split.validate();
  OnlineResult result{model0, {}, {}};
  ModelParams theta = model0;
  std::optional<Date> horizon = latest_of(latest_of(std::nullopt, split.train), split.validation);

  std::vector<const SlidingWindowSample*> labelled;
  for (const auto& s : split.train) labelled.push_back(&s);
  for (const auto& s : split.validation) labelled.push_back(&s);

  for (std::size_t start = 0; start < split.stream.size(); start += cfg.batch_days) {
    const std::size_t end = std::min(split.stream.size(), start + cfg.batch_days);
    const std::span<const SlidingWindowSample> batch(split.stream.data() + start, end - start);

    // Forecast first: no label of this batch has been read yet.
    for (const auto& s : batch) {
      try {
        result.predictions.push_back({{s.target_date(), predict(theta, s.window), true}, horizon});
      } catch (const Error& e) {
        log_warning("online: cannot predict " + format_date(s.target_date()) + ": " + e.what());
      }
    }

    std::vector<SlidingWindowSample> rolling;
    std::span<const SlidingWindowSample> val = split.validation;
    if (cfg.validation == ValidationPolicy::rolling) {
      rolling = rolling_validation(labelled, batch.front().target_date(), cfg.rolling_window_days);
      val = rolling;
    }

    StepResult step = online_step(theta, batch, val, cfg, loss);
    if (step.audit.latest_label && (!horizon || *horizon < *step.audit.latest_label)) {
      horizon = step.audit.latest_label;
    }
    theta = std::move(step.params);
    result.audit.push_back(std::move(step.audit));
    for (const auto& s : batch) labelled.push_back(&s);
  }
  result.final_params = std::move(theta);
  return result;
}

std::vector<Prediction> run_static(const ModelParams& model0, const DatasetSplit& split) {
  split.validate();
  const std::optional<Date> horizon = latest_of(latest_of(std::nullopt, split.train), split.validation);
  std::vector<Prediction> out;
  out.reserve(split.stream.size());
  for (const auto& s : split.stream) {
    try {
      out.push_back({{s.target_date(), predict(model0, s.window), true}, horizon});
    } catch (const Error& e) {
      log_warning("static: cannot predict " + format_date(s.target_date()) + ": " + e.what());
    }
  }
  return out;
}

ModelParams dynamic_init(const DynamicConfig& cfg, std::size_t j) {
  SeededRng rng = SeededRng::derive(cfg.train.seed, j);
  return init_params(cfg.spec, rng);
}

std::vector<Prediction> run_dynamic(const DynamicConfig& cfg, const DatasetSplit& split) {
  split.validate();
  if (cfg.train.epochs > 0) cfg.train.validate();
  std::vector<const SlidingWindowSample*> labelled;
  for (const auto& s : split.train) labelled.push_back(&s);
  for (const auto& s : split.validation) labelled.push_back(&s);

  std::vector<Prediction> out;
  out.reserve(split.stream.size());
  for (std::size_t j = 0; j < split.stream.size(); ++j) {
    const SlidingWindowSample& day = split.stream[j];
    try {
      ModelParams model = dynamic_init(cfg, j);
      std::optional<Date> horizon;
      if (cfg.train.epochs > 0) {
        std::vector<SlidingWindowSample> train_set, val_set;
        for (const auto* s : labelled) {
          if (s->target_date() < day.target_date()) train_set.push_back(*s);
        }
        const std::size_t n_val = train_set.size() > cfg.val_days ? cfg.val_days : 0;
        val_set.assign(train_set.end() - std::ptrdiff_t(n_val), train_set.end());
        train_set.resize(train_set.size() - n_val);
        if (train_set.empty()) throw DataError("no labelled history before the day");
        model = train(model, train_set, val_set, cfg.train).best;
        horizon = latest_of(latest_of(std::nullopt, train_set), val_set);
      }
      out.push_back({{day.target_date(), predict(model, day.window), true}, horizon});
    } catch (const Error& e) {
      log_warning("dynamic: cannot predict " + format_date(day.target_date()) + ": " + e.what());
    }
    labelled.push_back(&day);
  }
  return out;
}

void write_audit_csv(std::span<const AuditRecord> audit, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  auto num = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  out << "date,batch_loss,val_before,val_after,accepted,delta,eta,param_delta_norm\n";
  for (const auto& r : audit) {
    out << format_date(r.batch_date) << ',' << num(r.batch_loss) << ',' << num(r.val_before) << ','
        << num(r.val_after) << ',' << (r.accepted ? 1 : 0) << ',' << format_double(r.delta) << ','
        << format_double(r.eta) << ',' << format_double(r.param_delta_norm) << '\n';
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace epf
