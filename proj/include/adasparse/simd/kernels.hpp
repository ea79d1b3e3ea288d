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

#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// simd::scalar and, where the target supports it, a vector variant; the
// variant is picked once at runtime from CPUID. Set ADASPARSE_SIMD=scalar in
// the environment to pin the reference path.
//
// Variants differ from the reference only in summation order, so results
// agree to a few ulps (see tests/test_kernels.cpp) but are not bit-identical
// across ISAs. Within one process the choice is fixed, which is what the
// reproducibility guarantees rely on.

#include <cstddef>
#include <span>
#include <string_view>

namespace adasparse::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// ISA whose kernels the dispatching entry points below call.
Isa active_isa() noexcept;
/// Best ISA this CPU supports, ignoring the environment override.
Isa best_supported_isa() noexcept;
/// Overrides the dispatch choice. Not thread-safe; meant for tests and
/// benchmarks. Requesting an unsupported ISA falls back to Scalar.
void set_active_isa(Isa isa) noexcept;

double dot(std::span<const double> x, std::span<const double> y);
/// y += a·x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// Σ_i max(x_i − tau, 0)
double clipped_sum(std::span<const double> x, double tau);
/// Σ_i max(x_i − tau, 0)²
double clipped_sq_sum(std::span<const double> x, double tau);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double clipped_sum(const double* x, std::size_t n, double tau);
double clipped_sq_sum(const double* x, std::size_t n, double tau);
}  // namespace scalar

#if defined(ADASPARSE_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double clipped_sum(const double* x, std::size_t n, double tau);
double clipped_sq_sum(const double* x, std::size_t n, double tau);
}  // namespace avx2
#endif

}  // namespace adasparse::simd
