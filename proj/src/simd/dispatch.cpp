// Copyright 2026 The adasparse Authors.
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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "adasparse/core/error.hpp"
#include "adasparse/simd/kernels.hpp"

namespace adasparse::simd {
namespace {

Isa detect() noexcept {
#if defined(ADASPARSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

Isa initial() noexcept {
  const char* env = std::getenv("ADASPARSE_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return detect();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

void check_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, "kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

Isa best_supported_isa() noexcept { return detect(); }

void set_active_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && detect() != Isa::Avx2) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_length(x.size(), y.size());
#if defined(ADASPARSE_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::dot(x.data(), y.data(), x.size());
#endif
  return scalar::dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_same_length(x.size(), y.size());
#if defined(ADASPARSE_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::axpy(a, x.data(), y.data(), x.size());
#endif
  scalar::axpy(a, x.data(), y.data(), x.size());
}

double clipped_sum(std::span<const double> x, double tau) {
#if defined(ADASPARSE_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::clipped_sum(x.data(), x.size(), tau);
#endif
  return scalar::clipped_sum(x.data(), x.size(), tau);
}

double clipped_sq_sum(std::span<const double> x, double tau) {
#if defined(ADASPARSE_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::clipped_sq_sum(x.data(), x.size(), tau);
#endif
  return scalar::clipped_sq_sum(x.data(), x.size(), tau);
}

}  // namespace adasparse::simd
