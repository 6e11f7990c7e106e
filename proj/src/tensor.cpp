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

#include "epf/tensor.hpp"

#include <cmath>
#include <sstream>

#include "epf/error.hpp"
#include "epf/kernels.hpp"

namespace epf {

DimensionError::DimensionError(const std::string& what, std::size_t lr, std::size_t lc,
                               std::size_t rr, std::size_t rc)
    : Error(what + ": lhs " + std::to_string(lr) + "x" + std::to_string(lc) + " vs rhs " +
            std::to_string(rr) + "x" + std::to_string(rc)),
      lhs_rows(lr),
      lhs_cols(lc),
      rhs_rows(rr),
      rhs_cols(rc) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Tensor2: data length " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

Tensor2::Tensor2(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Tensor2: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Tensor2 Tensor2::column(std::span<const double> values) {
  return Tensor2(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

bool Tensor2::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor2::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul", a.rows(), a.cols(), b.rows(), b.cols());
  }
  Tensor2 out(a.rows(), b.cols());
  // i-k-j order: the inner loop is an axpy over a contiguous row of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      kernels::axpy(a(i, k), b.row_ptr(k), out_row, b.cols());
    }
  }
  return out;
}

Tensor2 elementwise(const Tensor2& a, const Tensor2& b, BinaryOp op) {
  if (!a.same_shape(b)) {
    throw DimensionError("elementwise", a.rows(), a.cols(), b.rows(), b.cols());
  }
  Tensor2 out(a.rows(), a.cols());
  auto x = a.flat();
  auto y = b.flat();
  auto z = out.flat();
  switch (op) {
    case BinaryOp::add:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
      break;
    case BinaryOp::sub:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
      break;
    case BinaryOp::mul:
      kernels::hadamard(x.data(), y.data(), z.data(), z.size());
      break;
  }
  return out;
}

Tensor2 map(const Tensor2& a, UnaryFn fn) {
  Tensor2 out(a.rows(), a.cols());
  auto x = a.flat();
  auto z = out.flat();
  for (std::size_t i = 0; i < z.size(); ++i) {
    switch (fn) {
      case UnaryFn::sigmoid:
        z[i] = stable_sigmoid(x[i]);
        break;
      case UnaryFn::tanh:
        z[i] = std::tanh(x[i]);
        break;
      case UnaryFn::exp:
        z[i] = std::exp(x[i]);
        break;
      case UnaryFn::log:
        if (!(x[i] > 0.0)) {
          std::ostringstream msg;
          msg << "map(log): non-positive element " << x[i] << " at index " << i;
          throw DomainError(msg.str(), i);
        }
        z[i] = std::log(x[i]);
        break;
    }
  }
  return out;
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

}  // namespace epf
