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

#include "adasparse/gradients.hpp"

#include <cmath>
#include <limits>

#include "adasparse/transforms.hpp"

namespace adasparse {
namespace {

void require_length(std::size_t got, std::size_t want) {
  if (got != want)
    throw Error(ErrorCode::DimensionMismatch, "vector length " + std::to_string(got) +
                                                  " differs from " + std::to_string(want));
}

// p·(e^x − 1) and p·(e^x − 1 − x) for x = (1 − α)·log p, accurate for small x.
// For large |x| the forms p^{2−α} − p and p^{2−α} − p − p·x avoid overflow of
// e^x when p is tiny.
struct SkewTerms {
  double em1;   // p_i^{2−α} − p_i
  double em1x;  // p_i^{2−α} − p_i − p_i·x
};

SkewTerms skew_terms(double p, double eps) {
  const double l = std::log(p);
  const double x = -eps * l;
  if (std::abs(x) < 1e-2) {
    // x²/2 + x³/6 + ... through x⁸, truncation below 1e-19 relative.
    const double tail =
        x * x *
        (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x * (1.0 / 720 + x * (1.0 / 5040 + x / 40320))))));
    return {p * (x + tail), p * tail};
  }
  const double powered = std::pow(p, 1.0 - eps);
  return {powered - p, powered - p - p * x};
}

}  // namespace

EntmaxBackwardContext::EntmaxBackwardContext(SimplexPoint p_star, double alpha)
    : p_star_(std::move(p_star)), alpha_(alpha), s_(p_star_.size(), 0.0) {
  if (p_star_.support().empty())
    throw Error(ErrorCode::DegenerateSupport, "forward output has an empty support");
  if (!(alpha_ >= 1.0))
    throw Error(ErrorCode::InvalidShape, "alpha must be >= 1");
  for (std::size_t i : p_star_.support()) {
    s_[i] = alpha_ == 1.0 ? p_star_[i] : std::pow(p_star_[i], 2.0 - alpha_);
    s_sum_ += s_[i];
  }
  std::vector<double> tilde(s_.size(), 0.0);
  for (std::size_t i : p_star_.support()) tilde[i] = s_[i] / s_sum_;
  p_tilde_ = SimplexPoint::from_probs(std::move(tilde));
}

std::vector<double> vjp_scores(const EntmaxBackwardContext& ctx, std::span<const double> upstream) {
  require_length(upstream.size(), ctx.size());
  const auto s = ctx.s();
  double su = 0.0;
  for (std::size_t i : ctx.p_star().support()) su += s[i] * upstream[i];
  const double scale = su / ctx.s_sum();
  std::vector<double> out(ctx.size(), 0.0);
  for (std::size_t i : ctx.p_star().support()) out[i] = s[i] * (upstream[i] - scale);
  return out;
}

std::vector<double> jvp_scores(const EntmaxBackwardContext& ctx, std::span<const double> tangent) {
  require_length(tangent.size(), ctx.size());
  const auto s = ctx.s();
  double sv = 0.0;
  for (std::size_t j = 0; j < ctx.size(); ++j) sv += s[j] * tangent[j];
  std::vector<double> out(ctx.size(), 0.0);
  for (std::size_t i = 0; i < ctx.size(); ++i) out[i] = s[i] * tangent[i] - s[i] * sv / ctx.s_sum();
  return out;
}

Matrix score_jacobian(const EntmaxBackwardContext& ctx) {
  const auto s = ctx.s();
  const std::size_t n = ctx.size();
  Matrix j(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) j(r, c) = -s[r] * s[c] / ctx.s_sum();
    j(r, r) += s[r];
  }
  return j;
}

std::vector<double> grad_alpha(const EntmaxBackwardContext& ctx) {
  const SimplexPoint& p = ctx.p_star();
  const auto& support = p.support();
  std::vector<double> g(p.size(), 0.0);
  const double eps = ctx.alpha() - 1.0;

  if (eps < kAlphaOneSwitch) {
    double m = 0.0;
    for (std::size_t i : support) {
      const double l = std::log(p[i]);
      m += p[i] * l * l;
    }
    for (std::size_t i : support) {
      const double l = std::log(p[i]);
      g[i] = 0.5 * p[i] * (m - l * l);
    }
    return g;
  }

  // With l_i = log p_i, G_i = p_i(e^{−εl_i} − 1 + εl_i), S = ΣG, H = −Σ p l and
  // D = Σ p^{2−α}, the closed form rearranges (using Σp = 1) to
  //   g_i = [p_i S (1 − ε l_i) − G_i (1 + ε H)] / (ε² D).
  std::vector<double> big_g(p.size(), 0.0);
  double sum_g = 0.0;
  double d = 1.0;
  double entropy = 0.0;
  for (std::size_t i : support) {
    const SkewTerms t = skew_terms(p[i], eps);
    big_g[i] = t.em1x;
    sum_g += t.em1x;
    d += t.em1;
    entropy -= p[i] * std::log(p[i]);
  }
  const double denom = eps * eps * d;
  for (std::size_t i : support) {
    const double l = std::log(p[i]);
    g[i] = (p[i] * sum_g * (1.0 - eps * l) - big_g[i] * (1.0 + eps * entropy)) / denom;
  }
  return g;
}

double grad_raw_alpha(const EntmaxBackwardContext& ctx, std::span<const double> upstream,
                      const ShapeParam& shape) {
  require_length(upstream.size(), ctx.size());
  const double dadr = shape.dalpha_draw();
  if (dadr == 0.0) return 0.0;
  const auto g = grad_alpha(ctx);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) acc += upstream[i] * g[i];
  return acc * dadr;
}

Matrix fd_gradient(const VectorFunction& f, std::span<const double> x, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidConfig, "finite-difference step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  Matrix jac;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const std::vector<double> plus = f(probe);
    probe[i] = x[i] - step;
    const std::vector<double> minus = f(probe);
    probe[i] = x[i];
    require_length(minus.size(), plus.size());
    if (i == 0) jac = Matrix(plus.size(), x.size());
    require_length(plus.size(), jac.rows());
    for (std::size_t r = 0; r < plus.size(); ++r) jac(r, i) = (plus[r] - minus[r]) / (2.0 * step);
  }
  return jac;
}

SimplexPoint simplex_oracle(const ScoreVector& z, double alpha, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.1))
    throw Error(ErrorCode::InvalidShape, "grid step must lie in (0, 0.1]");
  const auto idx = z.unmasked_indices();
  const std::size_t d = idx.size();
  if (d > 3) throw Error(ErrorCode::DimensionTooLarge, "simplex oracle supports d <= 3");

  std::vector<double> scores;
  for (std::size_t i : idx) scores.push_back(z.scores()[i]);
  const auto n = static_cast<long>(std::llround(1.0 / grid_step));
  const double inv = 1.0 / static_cast<double>(n);

  std::vector<double> best(d, 0.0);
  best[0] = 1.0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> p(d);
  const auto consider = [&] {
    const double v = entmax_objective(p, scores, alpha);
    if (v > best_value) {
      best_value = v;
      best = p;
    }
  };
  if (d == 1) {
    p[0] = 1.0;
    consider();
  } else if (d == 2) {
    for (long i = 0; i <= n; ++i) {
      p[0] = static_cast<double>(i) * inv;
      p[1] = static_cast<double>(n - i) * inv;
      consider();
    }
  } else {
    for (long i = 0; i <= n; ++i) {
      for (long j = 0; i + j <= n; ++j) {
        p[0] = static_cast<double>(i) * inv;
        p[1] = static_cast<double>(j) * inv;
        p[2] = static_cast<double>(n - i - j) * inv;
        consider();
      }
    }
  }

  std::vector<double> full(z.size(), 0.0);
  for (std::size_t k = 0; k < d; ++k) full[idx[k]] = best[k];
  return SimplexPoint::from_probs(std::move(full));
}

}  // namespace adasparse
