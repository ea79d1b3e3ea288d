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

#include "adasparse/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "adasparse/core/error.hpp"
#include "adasparse/core/rng.hpp"
#include "adasparse/gradients.hpp"
#include "adasparse/transforms.hpp"

namespace adasparse {
namespace {

std::vector<bool> support_of(const std::vector<long double>& p) {
  std::vector<bool> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] > 0.0L;
  return s;
}

}  // namespace

std::vector<long double> entmax_reference(std::span<const double> z, long double alpha) {
  const std::size_t n = z.size();
  std::vector<long double> p(n, 0.0L);
  if (n == 0) return p;
  const long double zmax = *std::max_element(z.begin(), z.end());
  if (alpha == 1.0L) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) total += p[i] = std::exp(static_cast<long double>(z[i]) - zmax);
    for (auto& v : p) v /= total;
    return p;
  }
  const long double am1 = alpha - 1.0L;
  const long double expo = 1.0L / am1;
  std::vector<long double> zs(n);
  for (std::size_t i = 0; i < n; ++i) zs[i] = am1 * (static_cast<long double>(z[i]) - zmax);
  const auto mass = [&](long double tau) {
    long double total = 0.0L;
    for (long double v : zs)
      if (v > tau) total += std::pow(v - tau, expo);
    return total;
  };
  long double lo = -1.0L;
  long double hi = 0.0L;
  for (int it = 0; it < 1000; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (mass(mid) >= 1.0L ? lo : hi) = mid;
  }
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    if (zs[i] > lo) p[i] = std::pow(zs[i] - lo, expo);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

void GradcheckOptions::validate() const {
  if (!(alpha > 1.0 + alpha_step) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidConfig, "gradcheck needs alpha > 1 + alpha_step");
  if (dim < 2) throw Error(ErrorCode::InvalidConfig, "gradcheck needs dim >= 2");
  if (!(score_step > 0.0) || !(alpha_step > 0.0) || !(score_scale > 0.0))
    throw Error(ErrorCode::InvalidConfig, "steps and scale must be positive");
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  options.validate();
  GradcheckReport report;
  report.options = options;
  Rng rng(options.seed);
  const std::size_t n = options.dim;
  const long double alpha = options.alpha;
  const long double h_a = options.alpha_step;

  for (std::size_t t = 0; t < options.trials; ++t) {
    GradcheckTrial trial;
    std::vector<double> z(n);
    std::vector<long double> p_lo_a, p_hi_a;
    bool stable = false;
    for (; trial.resamples <= options.max_resamples && !stable; ++trial.resamples) {
      for (auto& v : z) v = options.score_scale * rng.normal();
      const auto base = support_of(entmax_reference(z, alpha));
      p_lo_a = entmax_reference(z, alpha - h_a);
      p_hi_a = entmax_reference(z, alpha + h_a);
      stable = support_of(p_lo_a) == base && support_of(p_hi_a) == base;
      for (std::size_t i = 0; i < n && stable; ++i) {
        std::vector<double> zp = z;
        zp[i] = z[i] + options.score_step;
        stable = support_of(entmax_reference(zp, alpha)) == base;
        zp[i] = z[i] - options.score_step;
        stable = stable && support_of(entmax_reference(zp, alpha)) == base;
      }
    }
    if (!stable) throw Error(ErrorCode::NoConvergence, "no support-stable draw found");
    --trial.resamples;

    std::vector<double> u(n);
    for (auto& v : u) v = rng.normal();

    const EntmaxResult fwd = entmax(ScoreVector(z), ShapeParam::fixed(options.alpha));
    const EntmaxBackwardContext ctx(fwd.point, options.alpha);
    trial.support_size = fwd.point.support().size();

    // Score VJP against the central difference of ⟨u, p(z)⟩.
    const std::vector<double> vjp = vjp_scores(ctx, u);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> zp = z;
      zp[i] = z[i] + options.score_step;
      const auto hi = entmax_reference(zp, alpha);
      zp[i] = z[i] - options.score_step;
      const auto lo = entmax_reference(zp, alpha);
      long double d = 0.0L;
      for (std::size_t j = 0; j < n; ++j) d += static_cast<long double>(u[j]) * (hi[j] - lo[j]);
      const double fd = static_cast<double>(d / (2.0L * options.score_step));
      diff = std::max(diff, std::abs(vjp[i] - fd));
      scale = std::max(scale, std::abs(fd));
    }
    trial.score_error = diff / std::max(scale, kRelativeErrorFloor);

    // ∂p/∂α against the central difference in α, on the support.
    const std::vector<double> g = grad_alpha(ctx);
    double sum = 0.0;
    for (double v : g) sum += v;
    trial.alpha_sum = std::abs(sum);
    for (std::size_t i : fwd.point.support()) {
      const double fd = static_cast<double>((p_hi_a[i] - p_lo_a[i]) / (2.0L * h_a));
      trial.alpha_error =
          std::max(trial.alpha_error, std::abs(g[i] - fd) / std::max(std::abs(fd), kRelativeErrorFloor));
    }

    trial.pass = trial.score_error < options.score_tol && trial.alpha_error < options.alpha_tol &&
                 trial.alpha_sum <= options.sum_tol;
    report.max_score_error = std::max(report.max_score_error, trial.score_error);
    report.max_alpha_error = std::max(report.max_alpha_error, trial.alpha_error);
    report.max_alpha_sum = std::max(report.max_alpha_sum, trial.alpha_sum);
    report.trials.push_back(trial);
  }
  report.pass = std::all_of(report.trials.begin(), report.trials.end(),
                            [](const GradcheckTrial& t) { return t.pass; });
  return report;
}

nlohmann::json GradcheckReport::to_json() const {
  nlohmann::json trials_json = nlohmann::json::array();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    trials_json.push_back({{"trial", i},
                           {"support_size", t.support_size},
                           {"resamples", t.resamples},
                           {"score_rel_error", t.score_error},
                           {"alpha_rel_error", t.alpha_error},
                           {"alpha_sum", t.alpha_sum},
                           {"pass", t.pass}});
  }
  return {{"alpha", options.alpha},
          {"dim", options.dim},
          {"seed", options.seed},
          {"trials", std::move(trials_json)},
          {"max_score_rel_error", max_score_error},
          {"max_alpha_rel_error", max_alpha_error},
          {"max_alpha_sum", max_alpha_sum},
          {"pass", pass}};
}

}  // namespace adasparse
