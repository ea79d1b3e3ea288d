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

#include <cmath>
#include <limits>

#include "doctest.h"

#include "adasparse/core/matrix.hpp"
#include "adasparse/core/rng.hpp"
#include "adasparse/core/types.hpp"
#include "adasparse/serialization.hpp"

using namespace adasparse;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("validate_simplex accepts uniform and one-hot points") {
  const SimplexPoint u = validate_simplex(std::vector<double>{0.5, 0.5}, 1e-8);
  CHECK(u.support() == std::vector<std::size_t>{0, 1});
  const SimplexPoint h = validate_simplex(std::vector<double>{1.0, 0.0}, 1e-8);
  CHECK(h.support() == std::vector<std::size_t>{0});
}

TEST_CASE("validate_simplex rejects bad points") {
  CHECK(code_of([] { validate_simplex(std::vector<double>{0.6, 0.6}, 1e-8); }) == ErrorCode::NotNormalized);
  CHECK(code_of([] { validate_simplex(std::vector<double>{0.5, -0.1, 0.6}, 1e-8); }) == ErrorCode::NegativeEntry);
  CHECK(code_of([] { validate_simplex(std::vector<double>{}, 1e-8); }) == ErrorCode::InvalidShape);
}

TEST_CASE("validate_simplex clamps tiny negatives to exact zero") {
  const SimplexPoint p = validate_simplex(std::vector<double>{1.0 + 5e-10, -5e-10}, 1e-8);
  CHECK(p[1] == 0.0);
  CHECK(p.support().size() == 1);
}

TEST_CASE("ScoreVector invariants") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(code_of([] { ScoreVector(std::vector<double>{}); }) == ErrorCode::InvalidScores);
  CHECK(code_of([&] { ScoreVector(std::vector<double>{0.0, inf}); }) == ErrorCode::InvalidScores);
  CHECK(code_of([] { ScoreVector(std::vector<double>{0.0, std::nan("")}); }) == ErrorCode::InvalidScores);
  CHECK(code_of([] { ScoreVector(std::vector<double>{1.0, 2.0}, std::vector<bool>{true, true}); }) ==
        ErrorCode::InvalidScores);
  CHECK(code_of([] { ScoreVector(std::vector<double>{1.0, 2.0}, std::vector<bool>{true}); }) ==
        ErrorCode::InvalidScores);
  // A masked entry may hold anything.
  const ScoreVector z(std::vector<double>{1.0, inf}, std::vector<bool>{false, true});
  CHECK(z.unmasked_indices() == std::vector<std::size_t>{0});
}

TEST_CASE("ShapeParam from raw stays in (1, 2) and matches the sigmoid") {
  for (double raw : {-30.0, -3.0, -1.0, 0.0, 0.5, 2.0, 30.0}) {
    const ShapeParam s = ShapeParam::from_raw(raw);
    CHECK(s.alpha() > 1.0);
    CHECK(s.alpha() < 2.0);
    CHECK(std::abs(s.alpha() - (1.0 + 1.0 / (1.0 + std::exp(-raw)))) < 1e-12);
    CHECK(s.trainable());
    CHECK_FALSE(s.fixed_alpha().has_value());
  }
  CHECK(ShapeParam::from_raw(0.0).alpha() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(ShapeParam::from_raw(0.0).dalpha_draw() == doctest::Approx(0.25));
}

TEST_CASE("fixed ShapeParam") {
  const ShapeParam s = ShapeParam::fixed(3.0);
  CHECK(s.alpha() == 3.0);
  CHECK(*s.fixed_alpha() == 3.0);
  CHECK_FALSE(s.trainable());
  CHECK(s.dalpha_draw() == 0.0);
  CHECK(code_of([] { ShapeParam::fixed(0.99); }) == ErrorCode::InvalidShape);
  CHECK(code_of([] { ShapeParam::fixed(std::nan("")); }) == ErrorCode::InvalidShape);
}

TEST_CASE("attention kind names round-trip") {
  for (auto k : {AttentionKind::EncoderSelf, AttentionKind::Context, AttentionKind::DecoderSelf})
    CHECK(attention_kind_from_string(to_string(k)) == k);
  CHECK(to_string(AttentionKind::DecoderSelf) == "decoder-self");
  CHECK(code_of([] { attention_kind_from_string("cross"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("AttentionTensor validates rows, masks and causality") {
  const std::vector<ShapeParam> shapes{ShapeParam::fixed(1.5)};
  // 1 layer, 1 head, 2 × 2.
  const AttentionTensor ok(AttentionKind::DecoderSelf, 1, 1, 2, 2, {1.0, 0.0, 0.3, 0.7}, shapes);
  CHECK(ok.at(0, 0, 1, 1) == 0.7);
  CHECK(code_of([&] {
          AttentionTensor(AttentionKind::DecoderSelf, 1, 1, 2, 2, {0.5, 0.5, 0.3, 0.7}, shapes);
        }) == ErrorCode::NotNormalized);
  CHECK(code_of([&] {
          AttentionTensor(AttentionKind::EncoderSelf, 1, 1, 2, 2, {0.5, 0.6, 0.3, 0.7}, shapes);
        }) == ErrorCode::NotNormalized);
  MaskMatrix mask(2, 2);
  mask.set(0, 1, true);
  CHECK(code_of([&] {
          AttentionTensor(AttentionKind::Context, 1, 1, 2, 2, {0.5, 0.5, 0.3, 0.7}, shapes, mask);
        }) == ErrorCode::NotNormalized);
  CHECK(code_of([&] {
          AttentionTensor(AttentionKind::Context, 1, 1, 2, 2, {1.0, 0.0, 0.3}, shapes);
        }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("Matrix products") {
  const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b(3, 2, {7, 8, 9, 10, 11, 12});
  const Matrix c = matmul(a, b);
  CHECK(c == Matrix(2, 2, {58, 64, 139, 154}));
  CHECK(matmul_nt(a, b.transposed()) == c);
  CHECK(matmul_tn(a.transposed(), b) == c);
  CHECK(matmul(Matrix::identity(2), a) == a);
  CHECK(code_of([&] { matmul(a, a); }) == ErrorCode::DimensionMismatch);
  Matrix d = column_block(a, 1, 2);
  CHECK(d == Matrix(2, 2, {2, 3, 5, 6}));
  Matrix e(2, 3);
  add_column_block(e, d, 1);
  CHECK(e == Matrix(2, 3, {0, 2, 3, 0, 5, 6}));
  CHECK(max_abs(Matrix(1, 2, {-3, 2})) == 3);
}

TEST_CASE("Rng is deterministic and in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(1);
  for (int i = 0; i < 1000; ++i) CHECK(c.below(7) < 7);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = c.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / 20000) < 0.05);
  CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
}

TEST_CASE("JSON round trips") {
  const SimplexPoint p = validate_simplex(std::vector<double>{0.25, 0.75, 0.0});
  CHECK(simplex_point_from_json(to_json(p)) == p);
  const ScoreVector z(std::vector<double>{1.0, -2.0}, std::vector<bool>{false, true});
  const ScoreVector z2 = score_vector_from_json(to_json(z));
  CHECK(z2.mask() == z.mask());
  CHECK(z2.scores()[0] == 1.0);
  CHECK(score_vector_from_json(json::parse("[1, 2, 3]")).size() == 3);
  for (auto s : {ShapeParam::from_raw(0.3), ShapeParam::fixed(1.0)})
    CHECK(shape_param_from_json(to_json(s)) == s);
  const Matrix m(2, 2, {1, 2, 3, 4});
  CHECK(matrix_from_json(to_json(m)) == m);

  MaskMatrix mask(2, 2);
  mask.set(0, 1, true);
  const AttentionTensor t(AttentionKind::Context, 1, 2, 2, 2, {1, 0, 0.5, 0.5, 1, 0, 0.2, 0.8},
                          {ShapeParam::from_raw(0.1), ShapeParam::fixed(1.5)}, mask, {{0}, {1}});
  const json j = to_json(t);
  CHECK(j["layers"] == 1);
  CHECK(j["heads"] == 2);
  CHECK(j["kind"] == "context");
  CHECK(j["alpha_values"][0].size() == 2);
  CHECK(attention_tensor_from_json(j) == t);
  CHECK(code_of([] { simplex_point_from_json(json::parse("[0.9, 0.9]")); }) == ErrorCode::NotNormalized);
}
