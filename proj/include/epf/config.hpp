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

// Run configuration: an INI-style file of `[section]` headers and
// `key = value` lines, flattened to "section.key". '#' or ';' at the start of
// a line or after whitespace begins a comment. Values from the file override
// built-in defaults and command-line overrides win over both. Unknown keys
// are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epf/data.hpp"
#include "epf/loss.hpp"
#include "epf/model.hpp"
#include "epf/online.hpp"
#include "epf/synth.hpp"
#include "epf/trainer.hpp"

namespace epf {

class Config {
 public:
  // Starts from the built-in defaults.
  Config();

  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, const std::string& source);
  // Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  // "section.key=value".
  void set_assignment(std::string_view assignment);

  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  // Canonical INI rendering; parsing it back yields the same values.
  std::string to_ini() const;

 private:
  std::map<std::string, std::string> values_;
};

struct SplitConfig {
  std::size_t train_days = 60;  // calendar days in the training period
  std::size_t val_days = 14;    // tail of the training period held out as validation
};

struct RunConfig {
  CsvSources data;
  std::vector<std::string> feature_columns;  // empty keeps every column
  FeatureOptions features;
  WindowConfig window;
  SplitConfig split;
  ModelSpec model;  // input_size is filled in from the data
  TrainConfig train;
  OnlineConfig online;
  std::size_t dynamic_epochs = 0;
  SynthConfig synth;
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";
};

// Interprets every key. Throws ConfigError naming the key on a bad value.
RunConfig resolve(const Config& cfg);

std::vector<std::string> split_list(std::string_view text);

}  // namespace epf
