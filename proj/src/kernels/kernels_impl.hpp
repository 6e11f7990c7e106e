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

#include <cstddef>

namespace epf::kernels {

#define EPF_KERNEL_DECLS                                                                  \
  double dot(const double* a, const double* b, std::size_t n) noexcept;                   \
  void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;            \
  void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x,         \
            double* y) noexcept;                                                          \
  void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* v,       \
              double* y) noexcept;                                                        \
  void rank1(double* w, std::size_t rows, std::size_t cols, const double* a,              \
             const double* b) noexcept;                                                   \
  void hadamard(const double* x, const double* y, double* z, std::size_t n) noexcept;

namespace scalar {
EPF_KERNEL_DECLS
}

#if defined(EPF_HAVE_AVX2)
namespace avx2 {
EPF_KERNEL_DECLS
}
#endif

#if defined(EPF_HAVE_NEON)
namespace neon {
EPF_KERNEL_DECLS
}
#endif

#undef EPF_KERNEL_DECLS

}  // namespace epf::kernels
