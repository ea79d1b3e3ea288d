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

#include "adasparse/core/types.hpp"

#include <cmath>
#include <string>

namespace adasparse {

std::vector<bool> MaskMatrix::row(std::size_t r) const {
  return {bits_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
          bits_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

std::size_t MaskMatrix::unmasked_in_row(std::size_t r) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols_; ++c) n += excluded(r, c) ? 0 : 1;
  return n;
}

ScoreVector::ScoreVector(std::vector<double> scores, std::optional<std::vector<bool>> mask)
    : scores_(std::move(scores)), mask_(std::move(mask)) {
  if (scores_.empty()) throw Error(ErrorCode::InvalidScores, "score vector is empty");
  if (mask_ && mask_->size() != scores_.size())
    throw Error(ErrorCode::InvalidScores, "mask length differs from score length");
  bool any_unmasked = false;
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (masked(i)) continue;
    any_unmasked = true;
    if (!std::isfinite(scores_[i]))
      throw Error(ErrorCode::InvalidScores, "non-finite score at index " + std::to_string(i));
  }
  if (!any_unmasked) throw Error(ErrorCode::InvalidScores, "every position is masked");
}

std::vector<std::size_t> ScoreVector::unmasked_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(scores_.size());
  for (std::size_t i = 0; i < scores_.size(); ++i)
    if (!masked(i)) idx.push_back(i);
  return idx;
}

SimplexPoint SimplexPoint::from_probs(std::vector<double> probs) {
  SimplexPoint p;
  p.probs_ = std::move(probs);
  for (std::size_t i = 0; i < p.probs_.size(); ++i)
    if (p.probs_[i] > 0.0) p.support_.push_back(i);
  return p;
}

SimplexPoint validate_simplex(std::span<const double> p, double tol) {
  if (p.empty()) throw Error(ErrorCode::InvalidShape, "empty vector");
  std::vector<double> probs(p.begin(), p.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= -tol))
      throw Error(ErrorCode::NegativeEntry, "entry " + std::to_string(i) + " = " +
                                                std::to_string(probs[i]));
    if (probs[i] < 0.0) probs[i] = 0.0;
    if (probs[i] > 1.0 + tol)
      throw Error(ErrorCode::NotNormalized, "entry " + std::to_string(i) + " exceeds 1");
    sum += probs[i];
  }
  if (!(std::abs(sum - 1.0) <= tol))
    throw Error(ErrorCode::NotNormalized, "entries sum to " + std::to_string(sum));
  return SimplexPoint::from_probs(std::move(probs));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ShapeParam ShapeParam::from_raw(double raw) {
  if (!std::isfinite(raw)) throw Error(ErrorCode::InvalidShape, "raw alpha is not finite");
  return ShapeParam(raw, 1.0 + sigmoid(raw), false);
}

ShapeParam ShapeParam::fixed(double alpha) {
  if (!std::isfinite(alpha) || alpha < 1.0)
    throw Error(ErrorCode::InvalidShape, "alpha must be finite and >= 1, got " +
                                             std::to_string(alpha));
  return ShapeParam(0.0, alpha, true);
}

double ShapeParam::dalpha_draw() const noexcept {
  if (fixed_) return 0.0;
  const double s = sigmoid(raw_);
  return s * (1.0 - s);
}

std::string_view to_string(AttentionKind kind) noexcept {
  switch (kind) {
    case AttentionKind::EncoderSelf: return "encoder-self";
    case AttentionKind::Context: return "context";
    case AttentionKind::DecoderSelf: return "decoder-self";
  }
  return "unknown";
}

AttentionKind attention_kind_from_string(std::string_view name) {
  if (name == "encoder-self") return AttentionKind::EncoderSelf;
  if (name == "context") return AttentionKind::Context;
  if (name == "decoder-self") return AttentionKind::DecoderSelf;
  throw Error(ErrorCode::InvalidConfig, "unknown attention kind '" + std::string(name) + "'");
}

AttentionTensor::AttentionTensor(AttentionKind kind, std::size_t layers, std::size_t heads,
                                 std::size_t queries, std::size_t keys,
                                 std::vector<double> entries, std::vector<ShapeParam> shapes,
                                 std::optional<MaskMatrix> mask,
                                 std::vector<std::vector<std::size_t>> clusters)
    : kind_(kind),
      layers_(layers),
      heads_(heads),
      queries_(queries),
      keys_(keys),
      entries_(std::move(entries)),
      shapes_(std::move(shapes)),
      mask_(std::move(mask)),
      clusters_(std::move(clusters)) {
  if (layers_ == 0 || heads_ == 0 || queries_ == 0 || keys_ == 0)
    throw Error(ErrorCode::DimensionMismatch, "attention tensor has an empty dimension");
  if (entries_.size() != layers_ * heads_ * queries_ * keys_)
    throw Error(ErrorCode::DimensionMismatch, "attention entries do not match the shape");
  if (shapes_.size() != layers_ * heads_)
    throw Error(ErrorCode::DimensionMismatch, "need one shape parameter per (layer, head)");
  if (mask_ && (mask_->rows() != queries_ || mask_->cols() != keys_))
    throw Error(ErrorCode::DimensionMismatch, "mask shape differs from (queries, keys)");
  for (const auto& cluster : clusters_)
    for (std::size_t idx : cluster)
      if (idx >= keys_ || idx >= queries_)
        throw Error(ErrorCode::InvalidPartition, "cluster index out of range");

  for (std::size_t l = 0; l < layers_; ++l) {
    for (std::size_t h = 0; h < heads_; ++h) {
      for (std::size_t q = 0; q < queries_; ++q) {
        auto r = row(l, h, q);
        for (std::size_t k = 0; k < keys_; ++k) {
          const bool causal_zero = kind_ == AttentionKind::DecoderSelf && k > q;
          if ((excluded(q, k) || causal_zero) && r[k] != 0.0)
            throw Error(ErrorCode::NotNormalized,
                        "masked entry is not exactly zero at layer " + std::to_string(l) +
                            " head " + std::to_string(h) + " query " + std::to_string(q));
        }
        validate_simplex(r, kSimplexTolerance);
      }
    }
  }
}

}  // namespace adasparse
