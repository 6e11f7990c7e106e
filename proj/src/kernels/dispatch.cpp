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

#include <algorithm>
#include <cstdlib>
#include <string>

#include "epf/kernels.hpp"
#include "kernels_impl.hpp"

namespace epf::kernels {

namespace {

#define EPF_TABLE(ns, isa_value) \
  Table { isa_value, &ns::dot, &ns::axpy, &ns::gemv, &ns::gemv_t, &ns::rank1, &ns::hadamard }

const Table kScalar = EPF_TABLE(scalar, Isa::scalar);
#if defined(EPF_HAVE_AVX2)
const Table kAvx2 = EPF_TABLE(avx2, Isa::avx2);
#endif
#if defined(EPF_HAVE_NEON)
const Table kNeon = EPF_TABLE(neon, Isa::neon);
#endif

#undef EPF_TABLE

const Table& select() noexcept {
  const char* env = std::getenv("EPF_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return kScalar;
  if (want == "auto" || want == "avx2") {
    if (const Table* t = avx2_table()) return *t;
  }
  if (want == "auto" || want == "neon") {
    if (const Table* t = neon_table()) return *t;
  }
  return kScalar;
}

}  // namespace

const Table& scalar_table() noexcept { return kScalar; }

const Table* avx2_table() noexcept {
#if defined(EPF_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const Table* neon_table() noexcept {
#if defined(EPF_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &kNeon;
#else
  return nullptr;
#endif
}

const Table& active() noexcept {
  static const Table& table = select();
  return table;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

std::vector<const Table*> available() noexcept {
  std::vector<const Table*> out{&kScalar};
  if (const Table* t = avx2_table()) out.push_back(t);
  if (const Table* t = neon_table()) out.push_back(t);
  return out;
}

double dot_order_invariant(const double* a, const double* b, std::size_t n,
                           std::vector<double>& scratch) {
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i] * b[i];
  std::sort(scratch.begin(), scratch.end());
  double acc = 0.0;
  for (double v : scratch) acc += v;
  return acc;
}

}  // namespace epf::kernels
