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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"

#include "adasparse/core/rng.hpp"
#include "adasparse/gradients.hpp"
#include "adasparse/transforms.hpp"

using namespace adasparse;

namespace {

std::vector<double> probs(const SimplexPoint& p) { return {p.probs().begin(), p.probs().end()}; }

std::vector<double> run(const std::vector<double>& z, double alpha) {
  return probs(entmax(ScoreVector(z), ShapeParam::fixed(alpha)).point);
}

}  // namespace

TEST_CASE("softmax examples") {
  CHECK(oracle::max_abs_diff(probs(softmax(ScoreVector({0.0, 0.0}))), {0.5, 0.5}) < 1e-15);
  for (double c : {-700.0, 0.0, 3.5, 1e6})
    CHECK(oracle::max_abs_diff(probs(softmax(ScoreVector({c, c, c}))), {1.0 / 3, 1.0 / 3, 1.0 / 3}) < 1e-15);
  const std::vector<double> z{std::log(1.0), std::log(2.0), std::log(3.0)};
  const auto expected = oracle::softmax(z);
  CHECK(oracle::max_abs_diff(expected, {1.0 / 6, 2.0 / 6, 3.0 / 6}) < 1e-15);
  CHECK(oracle::max_abs_diff(probs(softmax(ScoreVector(z))), expected) < 1e-15);
  // Softmax support is the whole unmasked set, even when probabilities underflow.
  const auto far = softmax(ScoreVector({0.0, -500.0}));
  CHECK(far.support().size() == 2);
}

TEST_CASE("sparsemax examples") {
  auto r = sparsemax(ScoreVector({0.7, 0.3}));
  CHECK(oracle::max_abs_diff(probs(r.point), {0.7, 0.3}) < 1e-15);
  CHECK(std::abs(r.threshold.tau) < 1e-15);
  r = sparsemax(ScoreVector({2.0, 0.0}));
  CHECK(probs(r.point) == std::vector<double>{1.0, 0.0});
  CHECK(r.threshold.tau == 1.0);
  CHECK(r.threshold.support_size == 1);
  const auto grid = simplex_oracle(ScoreVector({2.0, 0.0}), 2.0, 1e-3);
  CHECK(oracle::max_abs_diff(probs(grid), {1.0, 0.0}) <= 1e-3);
  for (double c : {-4.0, 0.0, 9.0}) CHECK(probs(sparsemax(ScoreVector({c, c})).point) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("sparsemax agrees with the iterative projection") {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const auto z = oracle::random_vector(rng, 1 + rng.below(64), 1.5);
    double tau = 0;
    const auto expected = oracle::sparsemax(z, &tau);
    const auto r = sparsemax(ScoreVector(z));
    CHECK(oracle::max_abs_diff(probs(r.point), expected) < 1e-12);
    CHECK(std::abs(r.threshold.tau - tau) < 1e-12);
  }
}

TEST_CASE("sparsemax ties at the support boundary") {
  // Tied scores get equal mass; zero mass either way at the boundary.
  const auto r = sparsemax(ScoreVector({1.0, 0.0, 0.0}));
  CHECK(probs(r.point) == std::vector<double>{1.0, 0.0, 0.0});
  const auto s = sparsemax(ScoreVector({0.5, 0.5, -1.0}));
  CHECK(probs(s.point) == std::vector<double>{0.5, 0.5, 0.0});
}

TEST_CASE("bisection examples") {
  for (std::size_t d : {1u, 2u, 5u, 17u})
    for (double alpha : {1.1, 1.5, 2.0, 3.0}) {
      const auto p = probs(entmax_bisect(ScoreVector(std::vector<double>(d, 0.0)), alpha).point);
      for (double v : p) CHECK(std::abs(v - 1.0 / d) < 1e-12);
    }
  const std::vector<double> z{1.5, 0.5, -0.5};
  CHECK(oracle::max_abs_diff(probs(entmax_bisect(ScoreVector(z), 2.0).point), oracle::sparsemax(z)) < 1e-8);
  const std::vector<double> w{0.9, 0.1};
  CHECK(oracle::max_abs_diff(probs(entmax_bisect(ScoreVector(w), 1.0001).point), oracle::softmax(w)) < 1e-3);
}

TEST_CASE("bisection errors") {
  const ScoreVector z({0.3, 0.1});
  CHECK_THROWS_AS(entmax_bisect(z, 1.0), Error);
  try {
    entmax_bisect(z, 1.5, 0.0);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
  try {
    entmax_bisect(z, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidShape);
  }
}

TEST_CASE("bisection matches the extended-precision oracle and reconstructs from tau") {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    const auto z = oracle::random_vector(rng, 2 + rng.below(30), 2.0);
    const double alpha = 1.05 + 1.9 * rng.uniform();
    const auto r = entmax_bisect(ScoreVector(z), alpha, 1e-10);
    CHECK(oracle::max_abs_diff(probs(r.point), oracle::entmax(z, alpha)) < 1e-9);
    long double mass = 0;
    for (double v : z) {
      const long double x = (alpha - 1) * v - r.threshold.tau;
      if (x > 0) mass += std::pow(x, 1 / ((long double)alpha - 1));
    }
    CHECK(std::abs((double)mass - 1.0) < 1e-8);
    CHECK(r.threshold.support_size == r.point.support().size());
  }
}

TEST_CASE("exact 1.5-entmax examples") {
  auto r = entmax15_exact(ScoreVector({0.0, 0.0}));
  CHECK(probs(r.point) == std::vector<double>{0.5, 0.5});
  CHECK(std::abs(r.threshold.tau + 1.0 / std::sqrt(2.0)) < 1e-15);
  r = entmax15_exact(ScoreVector({10.0, 0.0}));
  CHECK(probs(r.point) == std::vector<double>{1.0, 0.0});
  CHECK(r.threshold.tau == 4.0);
  Rng rng(15);
  for (int t = 0; t < 500; ++t) {
    const auto z = oracle::random_vector(rng, 1 + rng.below(32), 2.0);
    const auto exact = entmax15_exact(ScoreVector(z));
    CHECK(oracle::max_abs_diff(probs(exact.point), probs(entmax_bisect(ScoreVector(z), 1.5, 1e-10).point)) < 1e-6);
    CHECK(oracle::max_abs_diff(probs(exact.point), oracle::entmax(z, 1.5)) < 1e-12);
    // τ here lives on the z/2 scale, which is the (α−1)z scale for α = 1.5.
    long double mass = 0;
    for (double v : z) {
      const long double x = 0.5L * v - exact.threshold.tau;
      if (x > 0) mass += x * x;
    }
    CHECK(std::abs((double)mass - 1.0) < 1e-10);
  }
}

TEST_CASE("entmax dispatch") {
  const std::vector<double> z{1.0, 2.0};
  CHECK(run(z, 1.0) == probs(softmax(ScoreVector(z))));
  const auto soft = entmax(ScoreVector(z), ShapeParam::fixed(1.0));
  CHECK(soft.threshold.support_size == 2);
  CHECK(std::abs(soft.threshold.tau - std::log(std::exp(1.0) + std::exp(2.0))) < 1e-12);
  CHECK(run({2.0, 0.0}, 2.0) == std::vector<double>{1.0, 0.0});
  CHECK(run({0.0, 0.0}, 1.5) == std::vector<double>{0.5, 0.5});
  CHECK(run({0.3, -0.2, 1.0}, 1.5) == probs(entmax15_exact(ScoreVector({0.3, -0.2, 1.0})).point));
  const auto from_raw = entmax(ScoreVector({0.3, -0.2}), ShapeParam::from_raw(0.0));
  CHECK(oracle::max_abs_diff(probs(from_raw.point), oracle::entmax({0.3, -0.2}, 1.5)) < 1e-12);
}

TEST_CASE("masked positions come back as exact zeros") {
  const ScoreVector z({5.0, 1.0, 100.0, 0.5}, std::vector<bool>{false, false, true, false});
  for (double alpha : {1.0, 1.2, 1.5, 2.0, 2.5}) {
    const auto r = entmax(z, ShapeParam::fixed(alpha));
    CHECK(r.point[2] == 0.0);
    CHECK(std::find(r.point.support().begin(), r.point.support().end(), 2u) == r.point.support().end());
    const auto unmasked = run({5.0, 1.0, 0.5}, alpha);
    CHECK(std::abs(r.point[0] - unmasked[0]) < 1e-15);
    CHECK(std::abs(r.point[3] - unmasked[2]) < 1e-15);
  }
  Matrix scores(2, 3, {0.0, 1.0, 2.0, 3.0, 3.0, 3.0});
  MaskMatrix mask(2, 3);
  mask.set(1, 0, true);
  const auto rows = entmax_rows(scores, ShapeParam::fixed(1.5), &mask);
  CHECK(rows.size() == 2);
  CHECK(probs(rows[1].point) == std::vector<double>{0.0, 0.5, 0.5});
}

TEST_CASE("tsallis entropy examples") {
  const auto one_hot = SimplexPoint::from_probs({0.0, 1.0, 0.0});
  for (double alpha : {1.0, 1.3, 2.0, 4.0}) CHECK(tsallis_entropy(one_hot, alpha) == 0.0);
  const auto coin = SimplexPoint::from_probs({0.5, 0.5});
  CHECK(tsallis_entropy(coin, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(tsallis_entropy(coin, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(shannon_entropy(std::vector<double>{0.0, 1.0}) == 0.0);
}

TEST_CASE("translation invariance and permutation equivariance") {
  Rng rng(99);
  for (int t = 0; t < 300; ++t) {
    const std::size_t d = 1 + rng.below(40);
    const auto z = oracle::random_vector(rng, d, 2.0);
    const double c = 50.0 * rng.normal();
    auto shifted = z;
    for (auto& v : shifted) v += c;
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = d; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<double> permuted(d);
    for (std::size_t i = 0; i < d; ++i) permuted[i] = z[perm[i]];
    for (double alpha : {1.0, 1.25, 1.5, 1.75, 2.0, 2.5}) {
      const auto p = run(z, alpha);
      CHECK(oracle::max_abs_diff(run(shifted, alpha), p) < 1e-10);
      const auto pp = run(permuted, alpha);
      for (std::size_t i = 0; i < d; ++i) CHECK(pp[i] == p[perm[i]]);
    }
  }
}

TEST_CASE("optimality against the grid oracle") {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 2 + rng.below(2);
    const auto z = oracle::random_vector(rng, d, 1.0);
    for (double alpha : {1.0, 1.25, 1.5, 2.0}) {
      const auto p = run(z, alpha);
      const auto g = simplex_oracle(ScoreVector(z), alpha, 1e-2);
      CHECK(oracle::objective(p, z, alpha) >= oracle::objective(probs(g), z, alpha) - 1e-12);
      CHECK(entmax_objective(p, z, alpha) == doctest::Approx(oracle::objective(p, z, alpha)).epsilon(1e-12));
    }
  }
}

TEST_CASE("limit agreement and support bounds") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const auto z = oracle::random_vector(rng, 1 + rng.below(64), 3.0);
    CHECK(oracle::max_abs_diff(run(z, 1.0), oracle::softmax(z)) < 1e-12);
    CHECK(oracle::max_abs_diff(run(z, 2.0), oracle::sparsemax(z)) < 1e-12);
    for (double alpha : {1.0, 1.4, 2.0}) CHECK_NOTHROW(validate_simplex(run(z, alpha), kSimplexTolerance));
  }
}

// Whether supports shrink monotonically in α is not claimed anywhere; this
// reports what happens rather than asserting it.
TEST_CASE("nested supports across alpha (diagnostic)") {
  Rng rng(123);
  const std::vector<double> alphas{1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0};
  std::size_t violations = 0, pairs = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto z = oracle::random_vector(rng, 2 + rng.below(30), 1.0 + 2.0 * rng.uniform());
    std::vector<std::vector<bool>> supports;
    for (double a : alphas) supports.push_back(oracle::support(run(z, a)));
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
      ++pairs;
      for (std::size_t j = 0; j < z.size(); ++j)
        if (supports[i + 1][j] && !supports[i][j]) {
          ++violations;
          break;
        }
    }
  }
  MESSAGE("nested-support violations: " << violations << " of " << pairs << " (alpha1 < alpha2) pairs");
  CHECK(pairs == 2000 * (alphas.size() - 1));
}
