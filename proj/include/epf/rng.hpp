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
#include <utility>

namespace epf {

// Seeded pseudo-random source used for every stochastic decision in the
// library (initialization, dropout masks, shuffling, synthetic data).
//
// Generator: xoshiro256** (Blackman & Vigna), state expanded from the 64-bit
// seed with splitmix64. The integer stream and uniform() are exact integer /
// dyadic arithmetic and therefore identical on every platform. normal() uses
// the Marsaglia polar method and depends on std::log being correctly rounded
// for cross-platform bit equality.
class SeededRng {
 public:
  enum class Algorithm : std::uint8_t { xoshiro256starstar = 1 };

  explicit SeededRng(std::uint64_t seed = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  static constexpr Algorithm algorithm() noexcept { return Algorithm::xoshiro256starstar; }

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream; the same (seed, stream_id) always yields the same child.
  static SeededRng derive(std::uint64_t seed, std::uint64_t stream_id) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace epf
