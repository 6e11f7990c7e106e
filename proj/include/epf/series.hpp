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

// Calendar-day containers shared by the data, model and evaluation layers.

#include <array>
#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "epf/tensor.hpp"

namespace epf {

inline constexpr std::size_t kHoursPerDay = 24;

using Date = std::chrono::sys_days;

// Parses ISO-8601 "YYYY-MM-DD". Throws ParseError on malformed input.
Date parse_date(std::string_view text);
std::string format_date(Date d);
// 0 = Monday ... 6 = Sunday.
unsigned iso_weekday_index(Date d);
unsigned month_of(Date d);

using FeatureNames = std::shared_ptr<const std::vector<std::string>>;

// Feature matrix for one calendar day: rows are features (order given by
// `names`), columns are the 24 hours.
struct FeatureDay {
  Date date{};
  Tensor2 x;  // M x 24
  FeatureNames names;

  std::size_t feature_count() const noexcept { return x.rows(); }
};

using PriceVector = std::array<double, kHoursPerDay>;

struct PriceDay {
  Date date{};
  PriceVector y{};
  bool normalized = false;
};

}  // namespace epf
