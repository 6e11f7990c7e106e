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

// Binary checkpoint: model architecture and tensors, normalization statistics
// and the flattened run configuration.
//
// Layout (all integers little-endian, doubles as little-endian IEEE-754 bits):
//   magic    "EPFCKPT\0"           8 bytes
//   version  u32                    currently 1
//   length   u64                    payload byte count
//   payload  see checkpoint.cpp
//   checksum u64                    FNV-1a 64 of the payload

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "epf/data.hpp"
#include "epf/model.hpp"

namespace epf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  NormStats stats;
  std::map<std::string, std::string> config;
};

void save_checkpoint(const ModelParams& params, const NormStats& stats,
                     const std::map<std::string, std::string>& config,
                     const std::filesystem::path& path);

// When `expected` is given, every tensor must match that architecture; the
// error names each offending tensor.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelSpec>& expected = std::nullopt);

}  // namespace epf
