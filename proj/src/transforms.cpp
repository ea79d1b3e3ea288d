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

#include "adasparse/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "adasparse/simd/kernels.hpp"

namespace adasparse {
namespace {

// Unmasked scores in descending order, remembering where each came from.
struct SortedScores {
  std::vector<double> values;       // descending, shifted so values[0] == 0
  std::vector<std::size_t> origin;  // index into the full score vector
  double shift = 0.0;               // the maximum that was subtracted
};

SortedScores sort_unmasked(const ScoreVector& z) {
  SortedScores s;
  s.origin = z.unmasked_indices();
  const auto scores = z.scores();
  std::stable_sort(s.origin.begin(), s.origin.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  s.shift = scores[s.origin.front()];
  s.values.reserve(s.origin.size());
  for (std::size_t i : s.origin) s.values.push_back(scores[i] - s.shift);
  return s;
}

// Sums a descending-sorted sequence of probabilities, normalizes them, and
// scatters them back to their original positions.
SimplexPoint scatter_normalized(std::size_t n, const SortedScores& s, std::vector<double> sorted_p) {
  double total = 0.0;
  for (double v : sorted_p) total += v;
  std::vector<double> probs(n, 0.0);
  for (std::size_t j = 0; j < sorted_p.size(); ++j) probs[s.origin[j]] = sorted_p[j] / total;
  return SimplexPoint::from_probs(std::move(probs));
}

EntmaxResult softmax_with_partition(const ScoreVector& z) {
  const SortedScores s = sort_unmasked(z);
  std::vector<double> e(s.values.size());
  std::transform(s.values.begin(), s.values.end(), e.begin(), [](double v) { return std::exp(v); });
  double total = 0.0;
  for (double v : e) total += v;
  SimplexPoint p = scatter_normalized(z.size(), s, std::move(e));
  const std::size_t k = p.support().size();
  return {std::move(p), Threshold{s.shift + std::log(total), k}};
}

bool is_alpha(double alpha, double target) { return std::abs(alpha - target) < 1e-12; }

}  // namespace

SimplexPoint softmax(const ScoreVector& z) { return softmax_with_partition(z).point; }

EntmaxResult sparsemax(const ScoreVector& z) {
  const SortedScores s = sort_unmasked(z);
  double cumsum = 0.0;
  double support_sum = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < s.values.size(); ++j) {
    cumsum += s.values[j];
    // Non-strict comparison: ties at the boundary join the support.
    if (1.0 + static_cast<double>(j + 1) * s.values[j] >= cumsum) {
      k = j + 1;
      support_sum = cumsum;
    } else {
      break;
    }
  }
  const double tau = (support_sum - 1.0) / static_cast<double>(k);
  std::vector<double> sorted_p(s.values.size());
  for (std::size_t j = 0; j < s.values.size(); ++j) sorted_p[j] = std::max(s.values[j] - tau, 0.0);
  SimplexPoint p = scatter_normalized(z.size(), s, std::move(sorted_p));
  const std::size_t support = p.support().size();
  return {std::move(p), Threshold{tau + s.shift, support}};
}

EntmaxResult entmax_bisect(const ScoreVector& z, double alpha, double tol) {
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidShape, "bisection requires alpha > 1, got " + std::to_string(alpha));
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw Error(ErrorCode::NoConvergence, "tolerance must be positive and finite");

  SortedScores s = sort_unmasked(z);
  const double am1 = alpha - 1.0;
  for (double& v : s.values) v *= am1;  // descending, max at 0
  const double exponent = 1.0 / am1;
  const bool linear = is_alpha(alpha, 2.0);
  const bool quadratic = is_alpha(alpha, 1.5);

  const auto mass = [&](double tau) {
    if (linear) return simd::clipped_sum(s.values, tau);
    if (quadratic) return simd::clipped_sq_sum(s.values, tau);
    double total = 0.0;
    for (double v : s.values) {
      if (v <= tau) break;
      total += std::pow(v - tau, exponent);
    }
    return total;
  };

  // mass(lo) >= 1 because the top score contributes 1^exponent; mass(hi) == 0.
  double lo = -1.0;
  double hi = 0.0;
  int iter = 0;
  for (; iter < kBisectionMaxIter && hi - lo > kBisectionWidth; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass(mid);
    if (m == 1.0) {
      lo = hi = mid;
      break;
    }
    if (m > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > kBisectionWidth)
    throw Error(ErrorCode::NoConvergence, "tau bracket did not shrink below " +
                                              std::to_string(kBisectionWidth));

  // Secant step inside the final bracket. Close to α = 1 the exponent
  // amplifies the bracket width, so the end points alone may miss tol.
  double tau = lo;
  if (hi > lo) {
    const double m_lo = mass(lo);
    const double m_hi = mass(hi);
    double best = std::abs(m_lo - 1.0);
    if (std::abs(m_hi - 1.0) < best) {
      tau = hi;
      best = std::abs(m_hi - 1.0);
    }
    if (m_lo > m_hi) {
      const double cand = lo + (m_lo - 1.0) / (m_lo - m_hi) * (hi - lo);
      if (cand >= lo && cand <= hi && std::abs(mass(cand) - 1.0) < best) tau = cand;
    }
  }
  std::vector<double> sorted_p(s.values.size(), 0.0);
  double unnormalized = 0.0;
  for (std::size_t j = 0; j < s.values.size(); ++j) {
    const double gap = s.values[j] - tau;
    if (gap <= 0.0) break;
    sorted_p[j] = linear ? gap : quadratic ? gap * gap : std::pow(gap, exponent);
    unnormalized += sorted_p[j];
  }
  if (!(std::abs(unnormalized - 1.0) <= tol))
    throw Error(ErrorCode::NoConvergence,
                "mass " + std::to_string(unnormalized) + " misses 1 by more than tol");

  SimplexPoint p = scatter_normalized(z.size(), s, std::move(sorted_p));
  const std::size_t support = p.support().size();
  return {std::move(p), Threshold{tau + am1 * s.shift, support}};
}

EntmaxResult entmax15_exact(const ScoreVector& z) {
  SortedScores s = sort_unmasked(z);
  for (double& v : s.values) v *= 0.5;
  const std::size_t n = s.values.size();

  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t chosen = 0;
  double chosen_tau = 0.0;
  std::size_t counted = 0;  // fallback: number of k with τ_k ≤ s_(k)
  std::vector<double> taus(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = static_cast<double>(j + 1);
    sum += s.values[j];
    sum_sq += s.values[j] * s.values[j];
    const double mean = sum / k;
    const double var = sum_sq / k - mean * mean;
    const double delta = (1.0 - k * var) / k;
    const double tau = mean - std::sqrt(std::max(delta, 0.0));
    taus[j] = tau;
    if (tau <= s.values[j]) ++counted;
    const bool next_ok = (j + 1 == n) || s.values[j + 1] <= tau;
    if (delta >= 0.0 && tau <= s.values[j] && next_ok) {
      chosen = j + 1;  // keep the largest valid support
      chosen_tau = tau;
    }
  }
  if (chosen == 0) {
    chosen = std::max<std::size_t>(counted, 1);
    chosen_tau = taus[chosen - 1];
  }

  std::vector<double> sorted_p(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double gap = std::max(s.values[j] - chosen_tau, 0.0);
    sorted_p[j] = gap * gap;
  }
  SimplexPoint p = scatter_normalized(z.size(), s, std::move(sorted_p));
  const std::size_t support = p.support().size();
  return {std::move(p), Threshold{chosen_tau + 0.5 * s.shift, support}};
}

EntmaxResult entmax(const ScoreVector& z, const ShapeParam& shape, double tol) {
  const double alpha = shape.alpha();
  if (alpha == 1.0) return softmax_with_partition(z);
  if (alpha == 2.0) return sparsemax(z);
  if (is_alpha(alpha, 1.5)) return entmax15_exact(z);
  return entmax_bisect(z, alpha, tol);
}

std::vector<EntmaxResult> entmax_rows(const Matrix& scores, const ShapeParam& shape,
                                      const MaskMatrix* mask, double tol) {
  if (mask != nullptr && (mask->rows() != scores.rows() || mask->cols() != scores.cols()))
    throw Error(ErrorCode::DimensionMismatch, "mask shape differs from score matrix");
  std::vector<EntmaxResult> out;
  out.reserve(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.row(r);
    std::optional<std::vector<bool>> row_mask;
    if (mask != nullptr) row_mask = mask->row(r);
    out.push_back(entmax(ScoreVector({row.begin(), row.end()}, std::move(row_mask)), shape, tol));
  }
  return out;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double tsallis_entropy(std::span<const double> p, double alpha) {
  if (alpha == 1.0) return shannon_entropy(p);
  double acc = 0.0;
  for (double v : p)
    if (v > 0.0) acc += v - std::pow(v, alpha);
  return acc / (alpha * (alpha - 1.0));
}

double entmax_objective(std::span<const double> p, std::span<const double> z, double alpha) {
  double lin = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) lin += p[i] * z[i];
  return lin + tsallis_entropy(p, alpha);
}

}  // namespace adasparse
