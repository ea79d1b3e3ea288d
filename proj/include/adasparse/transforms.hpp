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

// Forward π mappings onto the probability simplex. All of them share the
// threshold form p = [(α−1)z − τ]_+^{1/(α−1)} (softmax being its α → 1
// limit) and differ only in how τ is found.
//
// Masked score positions are removed before solving and reinserted as exact
// zeros. Scores are shifted by their maximum first, and every reduction runs
// over the scores in descending order, which makes the outputs exactly
// permutation-equivariant.

#include <span>
#include <vector>

#include "adasparse/core/matrix.hpp"
#include "adasparse/core/types.hpp"

namespace adasparse {

struct EntmaxResult {
  SimplexPoint point;
  Threshold threshold;
};

/// Default tolerance on |Σp − 1| before the final renormalization.
inline constexpr double kDefaultBisectionTol = 1e-8;
/// Bisection stops once the τ bracket is narrower than this...
inline constexpr double kBisectionWidth = 1e-14;
/// ...or after this many halvings.
inline constexpr int kBisectionMaxIter = 100;

SimplexPoint softmax(const ScoreVector& z);

/// Sort-and-scan Euclidean projection onto the simplex.
EntmaxResult sparsemax(const ScoreVector& z);

/// General α-entmax (α > 1) by bisection on τ over the bracket
/// [max (α−1)z − 1, max (α−1)z]. Positive entries are renormalized to sum to
/// one after convergence.
/// Throws Error(InvalidShape) for α ≤ 1, Error(NoConvergence) if tol is not
/// positive or the bracket cannot be resolved to tol.
EntmaxResult entmax_bisect(const ScoreVector& z, double alpha, double tol = kDefaultBisectionTol);

/// Exact 1.5-entmax: sorts s = z/2 and solves Σ_{i≤k}(s_i − τ)² = 1 for each
/// candidate support size k.
EntmaxResult entmax15_exact(const ScoreVector& z);

/// Dispatches on α: 1 → softmax (τ = log-partition), 2 → sparsemax,
/// 1.5 → exact solver, anything else → bisection.
EntmaxResult entmax(const ScoreVector& z, const ShapeParam& shape,
                    double tol = kDefaultBisectionTol);

/// Applies entmax independently to every row of `scores`. `mask`, when given,
/// must match the shape of `scores`.
std::vector<EntmaxResult> entmax_rows(const Matrix& scores, const ShapeParam& shape,
                                      const MaskMatrix* mask = nullptr,
                                      double tol = kDefaultBisectionTol);

/// Shannon entropy with 0·log 0 = 0.
double shannon_entropy(std::span<const double> p);

/// Tsallis α-entropy; Shannon at α = 1.
double tsallis_entropy(std::span<const double> p, double alpha);
inline double tsallis_entropy(const SimplexPoint& p, double alpha) {
  return tsallis_entropy(p.probs(), alpha);
}

/// p⊤z + H^T_α(p), the objective α-entmax maximizes over the simplex.
double entmax_objective(std::span<const double> p, std::span<const double> z, double alpha);

}  // namespace adasparse
