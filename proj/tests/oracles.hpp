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
// Reference computations used only by the tests. They share no code with the
// library and favour obviousness and extended precision over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "adasparse/core/rng.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline std::vector<long double> widen(const Vec& z) { return {z.begin(), z.end()}; }

inline Vec narrow(const std::vector<long double>& p) { return {p.begin(), p.end()}; }

inline Vec softmax(const Vec& z) {
  long double m = *std::max_element(z.begin(), z.end());
  std::vector<long double> e(z.size());
  long double total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) total += e[i] = std::exp((long double)z[i] - m);
  for (auto& v : e) v /= total;
  return narrow(e);
}

// Michelot's projection: shrink the active set until every member stays
// above the threshold.
inline Vec sparsemax(const Vec& z, double* tau_out = nullptr) {
  std::vector<bool> active(z.size(), true);
  long double tau = 0;
  for (;;) {
    long double sum = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (active[i]) sum += z[i], ++k;
    tau = (sum - 1) / k;
    bool changed = false;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (active[i] && z[i] <= tau) active[i] = false, changed = true;
    if (!changed) break;
  }
  if (tau_out) *tau_out = (double)tau;
  Vec p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = active[i] ? (double)(z[i] - tau) : 0.0;
  return p;
}

// Bisection on the unshifted threshold in long double, iterated until the
// bracket stops shrinking.
inline std::vector<long double> entmax_ld(const Vec& z, long double alpha) {
  const long double e = 1 / (alpha - 1);
  long double hi = -1e300L, lo;
  for (double v : z) hi = std::max(hi, (alpha - 1) * v);
  lo = hi - 1;
  auto mass = [&](long double tau) {
    long double s = 0;
    for (double v : z) {
      long double x = (alpha - 1) * v - tau;
      if (x > 0) s += std::pow(x, e);
    }
    return s;
  };
  for (int i = 0; i < 5000; ++i) {
    long double mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (mass(mid) >= 1) lo = mid; else hi = mid;
  }
  std::vector<long double> p(z.size());
  long double total = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    long double x = (alpha - 1) * z[i] - lo;
    p[i] = x > 0 ? std::pow(x, e) : 0;
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

inline Vec entmax(const Vec& z, double alpha) { return narrow(entmax_ld(z, alpha)); }

// ∂p/∂α exactly as written in the closed form, in long double.
inline Vec grad_alpha_literal(const Vec& p, double alpha) {
  const long double a = alpha;
  std::vector<long double> s(p.size(), 0);
  long double ssum = 0, h = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) {
      s[i] = std::pow((long double)p[i], 2 - a);
      ssum += s[i];
      h -= p[i] * std::log((long double)p[i]);
    }
  Vec g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    long double pt = s[i] / ssum;
    long double pi = p[i];
    g[i] = (double)((pi - pt) / ((a - 1) * (a - 1)) - (pi * std::log(pi) + pt * h) / (a - 1));
  }
  return g;
}

// α = 1 limit of the same derivative.
inline Vec grad_alpha_limit(const Vec& p) {
  long double m = 0;
  for (double v : p)
    if (v > 0) m += v * std::pow(std::log((long double)v), 2);
  Vec g(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) g[i] = (double)((-(long double)p[i] * std::pow(std::log((long double)p[i]), 2) + p[i] * m) / 2);
  return g;
}

inline double objective(const Vec& p, const Vec& z, double alpha) {
  long double v = 0, h = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v += (long double)p[i] * z[i];
    if (alpha == 1.0) {
      if (p[i] > 0) h -= p[i] * std::log((long double)p[i]);
    } else {
      h += p[i] - std::pow((long double)p[i], (long double)alpha);
    }
  }
  if (alpha != 1.0) h /= alpha * (alpha - 1);
  return (double)(v + h);
}

inline Vec random_vector(adasparse::Rng& rng, std::size_t n, double scale = 1.0) {
  Vec z(n);
  for (auto& v : z) v = scale * rng.normal();
  return z;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline std::vector<bool> support(const Vec& p) {
  std::vector<bool> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] > 0;
  return s;
}

}  // namespace oracle
