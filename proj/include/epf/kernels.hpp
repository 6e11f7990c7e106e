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

// Inner-loop arithmetic for the recurrent passes. Every kernel has a scalar
// reference implementation; vectorized variants (AVX2+FMA on x86-64, NEON on
// AArch64) are selected once at first use based on the running CPU.
//
// Set EPF_SIMD=scalar to force the reference kernels. Results differ from the
// reference only by summation order and fused multiply-add rounding; the
// selected variant is fixed for the process, so runs stay bit-reproducible
// on a given machine.

#include <cstddef>
#include <string_view>
#include <vector>

namespace epf::kernels {

enum class Isa { scalar, avx2, neon };

struct Table {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n) noexcept;
  // y[r] += sum_c w[r, c] * x[c] for row-major w (rows x cols)
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               double* y) noexcept;
  // y[c] += sum_r w[r, c] * v[r]
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* v,
                 double* y) noexcept;
  // w[r, c] += a[r] * b[c]
  void (*rank1)(double* w, std::size_t rows, std::size_t cols, const double* a,
                const double* b) noexcept;
  // z = x * y elementwise
  void (*hadamard)(const double* x, const double* y, double* z, std::size_t n) noexcept;
};

const Table& scalar_table() noexcept;
// nullptr when the variant is not compiled in or not supported by this CPU.
const Table* avx2_table() noexcept;
const Table* neon_table() noexcept;

// The table in use for this process.
const Table& active() noexcept;
std::string_view isa_name(Isa isa) noexcept;
// Every table usable on this machine, scalar first.
std::vector<const Table*> available() noexcept;

inline double dot(const double* a, const double* b, std::size_t n) noexcept {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  active().axpy(alpha, x, y, n);
}
inline void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 double* y) noexcept {
  active().gemv(w, rows, cols, x, y);
}
inline void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* v,
                   double* y) noexcept {
  active().gemv_t(w, rows, cols, v, y);
}
inline void rank1(double* w, std::size_t rows, std::size_t cols, const double* a,
                  const double* b) noexcept {
  active().rank1(w, rows, cols, a, b);
}
inline void hadamard(const double* x, const double* y, double* z, std::size_t n) noexcept {
  active().hadamard(x, y, z, n);
}

// Dot product whose result does not depend on the order of the terms: the
// products are sorted before summation. Used where a permutation of inputs
// must give bit-identical output.
double dot_order_invariant(const double* a, const double* b, std::size_t n,
                           std::vector<double>& scratch);

}  // namespace epf::kernels
