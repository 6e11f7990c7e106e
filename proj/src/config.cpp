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

#include "epf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "epf/error.hpp"

namespace epf {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"data.prices", ""},
      {"data.weather", ""},
      {"data.fuel_mix", ""},
      {"data.columns", ""},
      {"data.exclude", ""},
      {"data.price_lag", "true"},
      {"data.temporal", "true"},
      {"window.lookback", "7"},
      {"window.exclude_prediction_day_features", "false"},
      {"split.train_days", "60"},
      {"split.val_days", "14"},
      {"model.hidden_size", "64"},
      {"model.dropout", "0.3"},
      {"loss.base", "mae"},
      {"loss.alpha", "1"},
      {"loss.beta", "0.01"},
      {"loss.literal_batch_scaling", "false"},
      {"train.epochs", "100"},
      {"train.batch_size", "32"},
      {"train.optimizer", "adam"},
      {"train.eta", "0.001"},
      {"train.clip_norm", "5"},
      {"train.patience", "10"},
      {"train.min_delta", "0"},
      {"train.shuffle", "true"},
      {"online.eta", "0.01"},
      {"online.delta", "0"},
      {"online.freeze", "layer1"},
      {"online.validation", "fixed"},
      {"online.rolling_window_days", "14"},
      {"online.batch_days", "1"},
      {"dynamic.epochs", "100"},
      {"synth.days", "150"},
      {"synth.seed", "1"},
      {"synth.drift_day", "none"},
      {"synth.noise_sd", "1"},
      {"synth.renewable_coef", "-30"},
      {"synth.drift_strength", "1"},
      {"synth.morning_peak", "18"},
      {"synth.evening_peak", "30"},
      {"synth.peak_width", "2"},
      {"synth.start_date", "2023-01-02"},
      {"run.seed", "0"},
      {"run.output", "out"},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double as_double(const Config& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || std::isnan(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t as_uint(const Config& c, const std::string& key) {
  const std::string& v = c.get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool as_bool(const Config& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::optional<std::filesystem::path> as_path(const Config& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Config::Config() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

void Config::load_text(std::string_view text, const std::string& source) {
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    // A comment starts at '#' or ';' at the line start or after whitespace.
    std::string_view raw = line;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if ((raw[i] == '#' || raw[i] == ';') && (i == 0 || raw[i - 1] == ' ' || raw[i - 1] == '\t')) {
        raw = raw.substr(0, i);
        break;
      }
    }
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      set(full, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form section.key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string Config::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [k, v] : values_) {
    const auto dot = k.find('.');
    const std::string s = k.substr(0, dot);
    if (s != section) {
      out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    out << k.substr(dot + 1) << " = " << v << '\n';
  }
  return out.str();
}

RunConfig resolve(const Config& c) {
  RunConfig r;
  r.data.prices = c.get("data.prices");
  r.data.weather = as_path(c, "data.weather");
  r.data.fuel_mix = as_path(c, "data.fuel_mix");
  r.feature_columns = split_list(c.get("data.columns"));
  r.features.exclude = split_list(c.get("data.exclude"));
  r.features.include_price_lag = as_bool(c, "data.price_lag");
  r.features.include_temporal = as_bool(c, "data.temporal");

  r.window.lookback = as_uint(c, "window.lookback");
  r.window.exclude_prediction_day_features = as_bool(c, "window.exclude_prediction_day_features");
  if (r.window.lookback == 0 && r.window.exclude_prediction_day_features) {
    throw ConfigError("window.lookback must be >= 1 when prediction-day features are excluded");
  }
  r.split.train_days = as_uint(c, "split.train_days");
  r.split.val_days = as_uint(c, "split.val_days");

  r.model.hidden_size = as_uint(c, "model.hidden_size");
  r.model.dropout_rate = as_double(c, "model.dropout");
  if (r.model.hidden_size == 0) throw ConfigError("model.hidden_size must be >= 1");
  if (!(r.model.dropout_rate >= 0.0 && r.model.dropout_rate < 1.0)) {
    throw ConfigError("model.dropout must be in [0, 1)");
  }

  const std::string& base = c.get("loss.base");
  if (base == "mae") {
    r.train.loss.base = BaseLoss::mae;
  } else if (base == "mse") {
    r.train.loss.base = BaseLoss::mse;
  } else {
    throw ConfigError("loss.base: expected mae or mse, got '" + base + "'");
  }
  r.train.loss.alpha = as_double(c, "loss.alpha");
  r.train.loss.beta = as_double(c, "loss.beta");
  r.train.loss.literal_batch_scaling = as_bool(c, "loss.literal_batch_scaling");
  r.train.loss.validate();

  r.train.epochs = as_uint(c, "train.epochs");
  r.train.batch_size = as_uint(c, "train.batch_size");
  const std::string& opt = c.get("train.optimizer");
  if (opt == "adam") {
    r.train.optimizer.kind = OptimizerKind::adam;
  } else if (opt == "sgd") {
    r.train.optimizer.kind = OptimizerKind::sgd;
  } else {
    throw ConfigError("train.optimizer: expected adam or sgd, got '" + opt + "'");
  }
  r.train.optimizer.eta = as_double(c, "train.eta");
  const double clip = as_double(c, "train.clip_norm");
  if (clip > 0.0 && std::isfinite(clip)) {
    r.train.optimizer.clip_norm = clip;
  } else {
    r.train.optimizer.clip_norm.reset();
  }
  r.train.early_stop.patience_epochs = as_uint(c, "train.patience");
  r.train.early_stop.min_delta = as_double(c, "train.min_delta");
  r.train.shuffle = as_bool(c, "train.shuffle");

  r.online.eta = as_double(c, "online.eta");
  r.online.delta = as_double(c, "online.delta");
  r.online.freeze = FreezeMask{false, false, false};
  for (const auto& layer : split_list(c.get("online.freeze"))) {
    if (layer == "layer1") {
      r.online.freeze.layer1 = true;
    } else if (layer == "layer2") {
      r.online.freeze.layer2 = true;
    } else if (layer == "dense") {
      r.online.freeze.dense = true;
    } else if (layer != "none") {
      throw ConfigError("online.freeze: unknown layer '" + layer + "'");
    }
  }
  const std::string& policy = c.get("online.validation");
  if (policy == "fixed") {
    r.online.validation = ValidationPolicy::fixed;
  } else if (policy == "rolling") {
    r.online.validation = ValidationPolicy::rolling;
  } else {
    throw ConfigError("online.validation: expected fixed or rolling, got '" + policy + "'");
  }
  r.online.rolling_window_days = as_uint(c, "online.rolling_window_days");
  r.online.batch_days = as_uint(c, "online.batch_days");
  r.online.validate();

  r.dynamic_epochs = as_uint(c, "dynamic.epochs");

  r.synth.days = as_uint(c, "synth.days");
  r.synth.seed = as_uint(c, "synth.seed");
  if (c.get("synth.drift_day") != "none" && !c.get("synth.drift_day").empty()) {
    r.synth.drift_day = as_uint(c, "synth.drift_day");
  }
  r.synth.noise_sd = as_double(c, "synth.noise_sd");
  r.synth.renewable_coef = as_double(c, "synth.renewable_coef");
  r.synth.drift_strength = as_double(c, "synth.drift_strength");
  r.synth.peak_profile.morning = as_double(c, "synth.morning_peak");
  r.synth.peak_profile.evening = as_double(c, "synth.evening_peak");
  r.synth.peak_profile.width = as_double(c, "synth.peak_width");
  r.synth.start_date = c.get("synth.start_date");

  r.seed = as_uint(c, "run.seed");
  r.train.seed = r.seed;
  r.output = c.get("run.output");
  return r;
}

}  // namespace epf
