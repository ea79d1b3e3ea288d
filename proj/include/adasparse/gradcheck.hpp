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
// Randomized comparison of the analytic entmax Jacobians against central
// finite differences of an extended-precision reference solver.

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace adasparse {

/// α-entmax in long double by plain bisection, run until the bracket stops
/// shrinking. α = 1 gives softmax. Used as the finite-difference oracle.
std::vector<long double> entmax_reference(std::span<const double> z, long double alpha);

struct GradcheckOptions {
  double alpha = 1.5;
  std::size_t dim = 8;
  std::size_t trials = 100;
  std::uint64_t seed = 7;
  double score_scale = 2.0;    // z ~ N(0, score_scale²)
  double score_step = 1e-5;
  double alpha_step = 1e-5;
  double score_tol = 1e-5;     // max-norm relative error of the VJP
  double alpha_tol = 1e-4;     // componentwise relative error of ∂p/∂α on the support
  double sum_tol = 1e-10;      // |Σ_i ∂p_i/∂α|
  /// Redraws allowed per trial when a perturbation changes the support.
  std::size_t max_resamples = 1000;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

/// Relative error floor: differences are divided by max(|reference|, floor).
inline constexpr double kRelativeErrorFloor = 1e-7;

struct GradcheckTrial {
  std::size_t support_size = 0;
  std::size_t resamples = 0;
  double score_error = 0.0;
  double alpha_error = 0.0;
  double alpha_sum = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  GradcheckOptions options;
  std::vector<GradcheckTrial> trials;
  double max_score_error = 0.0;
  double max_alpha_error = 0.0;
  double max_alpha_sum = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Draws `trials` score vectors whose support is unchanged by every
/// perturbation used, then checks vjp_scores against the finite-difference
/// gradient of ⟨u, p(z)⟩ for random u and grad_alpha against the
/// finite-difference derivative in α.
/// Throws Error(InvalidConfig) or Error(NoConvergence) when no stable draw is
/// found within max_resamples.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace adasparse
