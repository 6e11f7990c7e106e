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

#include "epf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "epf/error.hpp"

namespace epf {

namespace {

constexpr char kMagic[8] = {'E', 'P', 'F', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> bytes;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.begin() + std::ptrdiff_t(pos_), bytes_.begin() + std::ptrdiff_t(pos_ + n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw CheckpointError("checkpoint payload truncated");
  }
  std::uint64_t get(int n) {
    need(std::size_t(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(bytes_[pos_ + std::size_t(i)]) << (8 * i);
    pos_ += std::size_t(n);
    return v;
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t read_le(const std::vector<std::uint8_t>& b, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t(b[at + std::size_t(i)]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const NormStats& stats,
                     const std::map<std::string, std::string>& config,
                     const std::filesystem::path& path) {
  params.validate();
  Writer w;
  w.u64(params.layer1.input_size);
  w.u64(params.layer1.hidden_size);
  w.u64(params.layer2.hidden_size);
  w.f64(params.dropout_rate);
  const auto views = tensors(params);
  w.u32(static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views) {
    w.str(v.name);
    w.u64(v.tensor->rows());
    w.u64(v.tensor->cols());
    for (double x : v.tensor->flat()) w.f64(x);
  }

  w.u32(static_cast<std::uint32_t>(stats.feature_names.size()));
  for (std::size_t i = 0; i < stats.feature_names.size(); ++i) {
    w.str(stats.feature_names[i]);
    w.f64(stats.mean[i]);
    w.f64(stats.sd[i]);
  }
  w.f64(stats.price_mean);
  w.f64(stats.price_sd);
  w.u32(static_cast<std::uint32_t>(stats.dropped.size()));
  for (const auto& d : stats.dropped) w.str(d);

  w.u32(static_cast<std::uint32_t>(config.size()));
  for (const auto& [k, v] : config) {
    w.str(k);
    w.str(v);
  }

  Writer file;
  file.bytes.insert(file.bytes.end(), std::begin(kMagic), std::end(kMagic));
  file.u32(kCheckpointVersion);
  file.u64(w.bytes.size());
  file.bytes.insert(file.bytes.end(), w.bytes.begin(), w.bytes.end());
  file.u64(fnv1a(w.bytes));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(file.bytes.data()), std::streamsize(file.bytes.size()));
  if (!out) throw CheckpointError("write failed for checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelSpec>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint '" + path.string() + "'";

  constexpr std::size_t header = sizeof kMagic + 4 + 8;
  if (raw.size() < header) throw CheckpointError(where + ": truncated header");
  if (std::memcmp(raw.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError(where + ": not a checkpoint file");
  const auto version = static_cast<std::uint32_t>(read_le(raw, 8, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(where + ": unsupported version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t length = read_le(raw, 12, 8);
  if (raw.size() < header + length + 8) {
    throw CheckpointError(where + ": truncated (" + std::to_string(raw.size()) + " bytes, expected " +
                          std::to_string(header + length + 8) + ")");
  }
  if (raw.size() > header + length + 8) throw CheckpointError(where + ": trailing bytes after checksum");
  const std::vector<std::uint8_t> payload(raw.begin() + header, raw.begin() + std::ptrdiff_t(header + length));
  if (read_le(raw, header + length, 8) != fnv1a(payload)) {
    throw CheckpointError(where + ": checksum mismatch (file corrupted)");
  }

  Reader r(payload);
  Checkpoint ck;
  const std::uint64_t input_size = r.u64();
  const std::uint64_t hidden1 = r.u64();
  const std::uint64_t hidden2 = r.u64();
  const double dropout = r.f64();
  if (input_size == 0 || hidden1 == 0 || hidden2 != hidden1 || input_size > (1u << 20) || hidden1 > (1u << 20)) {
    throw CheckpointError(where + ": implausible architecture");
  }
  ck.params = ModelParams::zeros(input_size, hidden1, dropout);

  std::string shape_errors;
  if (expected) {
    ModelParams want = ModelParams::zeros(expected->input_size, expected->hidden_size);
    for (const auto& v : tensors(want)) {
      for (const auto& have : tensors(std::as_const(ck.params))) {
        if (have.name == v.name && !have.tensor->same_shape(*v.tensor)) {
          shape_errors += " " + v.name + " (" + have.tensor->shape_string() + " vs expected " +
                          v.tensor->shape_string() + ")";
        }
      }
    }
    if (!shape_errors.empty()) throw CheckpointError(where + ": shape mismatch:" + shape_errors);
  }

  auto views = tensors(ck.params);
  const std::uint32_t n_tensors = r.u32();
  if (n_tensors != views.size()) {
    throw CheckpointError(where + ": expected " + std::to_string(views.size()) + " tensors, found " +
                          std::to_string(n_tensors));
  }
  for (auto& v : views) {
    const std::string name = r.str();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (name != v.name) throw CheckpointError(where + ": expected tensor " + v.name + ", found " + name);
    if (rows != v.tensor->rows() || cols != v.tensor->cols()) {
      throw CheckpointError(where + ": tensor " + name + " has shape " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", architecture requires " + v.tensor->shape_string());
    }
    for (double& x : v.tensor->flat()) x = r.f64();
  }

  const std::uint32_t n_features = r.u32();
  if (n_features != input_size) {
    throw CheckpointError(where + ": normalization covers " + std::to_string(n_features) +
                          " features, model expects " + std::to_string(input_size));
  }
  for (std::uint32_t i = 0; i < n_features; ++i) {
    ck.stats.feature_names.push_back(r.str());
    ck.stats.mean.push_back(r.f64());
    ck.stats.sd.push_back(r.f64());
  }
  ck.stats.price_mean = r.f64();
  ck.stats.price_sd = r.f64();
  const std::uint32_t n_dropped = r.u32();
  for (std::uint32_t i = 0; i < n_dropped; ++i) ck.stats.dropped.push_back(r.str());

  const std::uint32_t n_config = r.u32();
  for (std::uint32_t i = 0; i < n_config; ++i) {
    std::string k = r.str();
    ck.config[k] = r.str();
  }
  if (!r.done()) throw CheckpointError(where + ": unexpected bytes at end of payload");
  try {
    ck.params.validate();
  } catch (const ContractError& e) {
    throw CheckpointError(where + ": " + e.what());
  }
  return ck;
}

}  // namespace epf
