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

#include <functional>
#include <span>
#include <vector>

#include "epf/tensor.hpp"

namespace epf {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central-difference gradient: (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
// Throws OracleError naming the coordinate if any evaluation is non-finite.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x,
                                     double h = kDefaultFiniteDiffStep);

// Solves A X = B for symmetric positive-definite A via Cholesky.
// Throws NumericError if A is not numerically positive definite.
Tensor2 cholesky_solve(const Tensor2& a, const Tensor2& b);

double l2_norm(std::span<const double> x) noexcept;

}  // namespace epf
