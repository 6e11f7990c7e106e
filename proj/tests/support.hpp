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

// Fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "epf/model.hpp"
#include "epf/rng.hpp"
#include "epf/series.hpp"

namespace epf::test {

inline FeatureNames numbered_names(std::size_t m) {
  auto names = std::make_shared<std::vector<std::string>>();
  for (std::size_t i = 0; i < m; ++i) names->push_back("f" + std::to_string(i));
  return names;
}

// Consecutive days from 2024-01-01 with entries uniform in [lo, hi).
inline std::vector<FeatureDay> random_window(SeededRng& rng, std::size_t days, std::size_t m,
                                             double lo = -1.0, double hi = 1.0) {
  const FeatureNames names = numbered_names(m);
  std::vector<FeatureDay> out;
  const Date start = parse_date("2024-01-01");
  for (std::size_t d = 0; d < days; ++d) {
    FeatureDay day{start + std::chrono::days{d}, Tensor2(m, kHoursPerDay), names};
    for (double& v : day.x.flat()) v = rng.uniform(lo, hi);
    out.push_back(std::move(day));
  }
  return out;
}

// Initialised parameters with every bias perturbed, so no gradient is
// structurally zero.
inline ModelParams random_params(std::size_t m, std::size_t hidden, SeededRng& rng, double dropout = 0.0) {
  ModelParams p = init_params({m, hidden, dropout}, rng);
  for (auto& v : tensors(p)) {
    if (v.tensor->cols() == 1) {
      for (double& b : v.tensor->flat()) b += rng.uniform(-0.5, 0.5);
    }
  }
  return p;
}

inline PriceVector random_prices(SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  PriceVector y;
  for (double& v : y) v = rng.uniform(lo, hi);
  return y;
}

// max |a - b| / max(floor, |a|, |b|) over paired entries. The floor keeps
// coordinates whose true gradient is ~0 from dividing rounding noise by ~0.
inline double max_rel_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({floor, std::abs(a[i]), std::abs(b[i])});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace epf::test
