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

// Backward passes of α-entmax: the Jacobian with respect to the scores and
// the derivative of the output with respect to α itself. Also hosts the
// finite-difference and brute-force simplex oracles that validate them.

#include <functional>
#include <span>
#include <vector>

#include "adasparse/core/matrix.hpp"
#include "adasparse/core/types.hpp"

namespace adasparse {

/// Below this distance from 1, grad_alpha evaluates the α = 1 closed form.
inline constexpr double kAlphaOneSwitch = 1e-6;

/// Everything the backward passes need from one forward output p★:
/// s_i = (p★_i)^{2−α} on the support (0 elsewhere) and the skewed
/// distribution p̃ = s / Σs.
class EntmaxBackwardContext {
 public:
  /// Throws Error(DegenerateSupport) when p★ has an empty support.
  EntmaxBackwardContext(SimplexPoint p_star, double alpha);

  const SimplexPoint& p_star() const noexcept { return p_star_; }
  double alpha() const noexcept { return alpha_; }
  std::span<const double> s() const noexcept { return s_; }
  double s_sum() const noexcept { return s_sum_; }
  const SimplexPoint& p_tilde() const noexcept { return p_tilde_; }
  std::size_t size() const noexcept { return s_.size(); }

 private:
  SimplexPoint p_star_;
  double alpha_;
  std::vector<double> s_;
  double s_sum_ = 0.0;
  SimplexPoint p_tilde_;
};

/// uᵀJ with J = diag(s) − ssᵀ/Σs. Zero off the support.
/// Throws Error(DimensionMismatch) if `upstream` has the wrong length.
std::vector<double> vjp_scores(const EntmaxBackwardContext& ctx, std::span<const double> upstream);

/// J·v. J is symmetric, so this matches vjp_scores; kept separate so the
/// symmetry can be checked against the explicit matrix.
std::vector<double> jvp_scores(const EntmaxBackwardContext& ctx, std::span<const double> tangent);

/// The full n×n score Jacobian.
Matrix score_jacobian(const EntmaxBackwardContext& ctx);

/// ∂p★/∂α. Exactly zero off the support; components sum to zero.
///
/// For α > 1 the closed form
///   g_i = (p_i − p̃_i)/(α−1)² − (p_i log p_i + p̃_i H(p))/(α−1)
/// is evaluated in an algebraically equivalent arrangement built on
/// expm1-type terms, which avoids the cancellation between its two
/// O(1/(α−1)) pieces. Within kAlphaOneSwitch of 1 the limit
///   g_i = (−p_i log² p_i + p_i Σ_j p_j log² p_j)/2
/// is used instead. Entries that are positive are used as-is however small.
std::vector<double> grad_alpha(const EntmaxBackwardContext& ctx);

/// ⟨upstream, ∂p★/∂α⟩ · dα/draw for the sigmoid parametrization. Zero for
/// fixed shapes.
double grad_raw_alpha(const EntmaxBackwardContext& ctx, std::span<const double> upstream,
                      const ShapeParam& shape);

using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Central-difference Jacobian estimate; column i is
/// (f(x + step·e_i) − f(x − step·e_i)) / (2·step).
Matrix fd_gradient(const VectorFunction& f, std::span<const double> x, double step);

/// Brute-force maximizer of p⊤z + H^T_α(p) over a simplex grid of spacing
/// `grid_step`. Only for d ≤ 3 unmasked entries.
/// Throws Error(DimensionTooLarge) for d > 3 and Error(InvalidShape) for a
/// grid step outside (0, 0.1].
SimplexPoint simplex_oracle(const ScoreVector& z, double alpha, double grid_step);

}  // namespace adasparse
