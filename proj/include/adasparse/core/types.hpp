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

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "adasparse/core/error.hpp"

namespace adasparse {

/// Absolute tolerance on Σp = 1 used throughout for 64-bit floats.
inline constexpr double kSimplexTolerance = 1e-8;

/// n×m boolean matrix; `true` marks a position excluded from attention.
class MaskMatrix {
 public:
  MaskMatrix() = default;
  MaskMatrix(std::size_t rows, std::size_t cols, bool excluded = false)
      : rows_(rows), cols_(cols), bits_(rows * cols, excluded) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool excluded(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, bool excluded) { bits_[r * cols_ + c] = excluded; }

  std::vector<bool> row(std::size_t r) const;
  std::size_t unmasked_in_row(std::size_t r) const;

  friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<bool> bits_;
};

/// A row of logits z. Masked entries are dropped by every transform and come
/// back as exact zeros; their stored score is never read.
class ScoreVector {
 public:
  /// Throws Error(InvalidScores) if empty, if an unmasked entry is not
  /// finite, or if every entry is masked.
  explicit ScoreVector(std::vector<double> scores,
                       std::optional<std::vector<bool>> mask = std::nullopt);

  std::size_t size() const noexcept { return scores_.size(); }
  std::span<const double> scores() const noexcept { return scores_; }
  const std::optional<std::vector<bool>>& mask() const noexcept { return mask_; }
  bool masked(std::size_t i) const { return mask_ && (*mask_)[i]; }
  bool has_mask() const noexcept { return mask_.has_value(); }

  std::vector<std::size_t> unmasked_indices() const;

 private:
  std::vector<double> scores_;
  std::optional<std::vector<bool>> mask_;
};

/// A point of the probability simplex together with its support
/// (indices of strictly positive entries, ascending).
class SimplexPoint {
 public:
  SimplexPoint() = default;

  /// Builds from entries already known to be a distribution; only computes the
  /// support. Use validate_simplex for untrusted input.
  static SimplexPoint from_probs(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  bool in_support(std::size_t i) const { return probs_[i] > 0.0; }

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> probs_;
  std::vector<std::size_t> support_;
};

/// Checks p against the simplex at absolute tolerance `tol`. Entries in
/// [-tol, 0) are clamped to zero.
/// Throws Error(NegativeEntry) or Error(NotNormalized).
SimplexPoint validate_simplex(std::span<const double> p, double tol = kSimplexTolerance);

double sigmoid(double x) noexcept;

/// Shape parameter α of the entmax family. Learnable shapes are stored as the
/// pre-activation `raw` with α = 1 + sigmoid(raw) ∈ (1, 2); fixed shapes
/// carry any α ≥ 1 and are not trained.
class ShapeParam {
 public:
  static ShapeParam from_raw(double raw);
  /// Throws Error(InvalidShape) unless alpha ≥ 1 and finite.
  static ShapeParam fixed(double alpha);

  double alpha() const noexcept { return alpha_; }
  double raw() const noexcept { return raw_; }
  bool trainable() const noexcept { return !fixed_; }
  std::optional<double> fixed_alpha() const noexcept {
    return fixed_ ? std::optional<double>(alpha_) : std::nullopt;
  }

  /// dα/draw = σ(raw)(1 − σ(raw)); zero for fixed shapes.
  double dalpha_draw() const noexcept;

  friend bool operator==(const ShapeParam&, const ShapeParam&) = default;

 private:
  ShapeParam(double raw, double alpha, bool fixed) : raw_(raw), alpha_(alpha), fixed_(fixed) {}

  double raw_ = 0.0;
  double alpha_ = 1.5;
  bool fixed_ = false;
};

/// Lagrange multiplier τ of the threshold form p = [(α−1)z − τ]_+^{1/(α−1)}
/// and the resulting support size. For α = 1 `tau` is the log-partition.
struct Threshold {
  double tau = 0.0;
  std::size_t support_size = 0;
};

enum class AttentionKind { EncoderSelf, Context, DecoderSelf };

std::string_view to_string(AttentionKind kind) noexcept;
/// Throws Error(InvalidConfig) for unknown names.
AttentionKind attention_kind_from_string(std::string_view name);

/// Attention probabilities of one attention mechanism for one sequence,
/// indexed [layer][head][query][key], with one ShapeParam per (layer, head).
/// Optional `clusters` partition the token positions (self-attention only) and
/// feed the cluster-merge metric.
class AttentionTensor {
 public:
  AttentionTensor() = default;

  /// Validates every invariant: each row is a simplex point over its unmasked
  /// keys (tolerance 1e-8), masked entries are exactly 0, and decoder-self
  /// tensors are causal. Throws Error(DimensionMismatch / NotNormalized /
  /// NegativeEntry).
  AttentionTensor(AttentionKind kind, std::size_t layers, std::size_t heads,
                  std::size_t queries, std::size_t keys, std::vector<double> entries,
                  std::vector<ShapeParam> shapes, std::optional<MaskMatrix> mask = std::nullopt,
                  std::vector<std::vector<std::size_t>> clusters = {});

  AttentionKind kind() const noexcept { return kind_; }
  std::size_t layers() const noexcept { return layers_; }
  std::size_t heads() const noexcept { return heads_; }
  std::size_t queries() const noexcept { return queries_; }
  std::size_t keys() const noexcept { return keys_; }

  double at(std::size_t layer, std::size_t head, std::size_t q, std::size_t k) const {
    return entries_[offset(layer, head, q) + k];
  }
  std::span<const double> row(std::size_t layer, std::size_t head, std::size_t q) const {
    return {entries_.data() + offset(layer, head, q), keys_};
  }
  std::span<const double> entries() const noexcept { return entries_; }

  const ShapeParam& shape(std::size_t layer, std::size_t head) const {
    return shapes_[layer * heads_ + head];
  }
  const std::vector<ShapeParam>& shapes() const noexcept { return shapes_; }

  const std::optional<MaskMatrix>& mask() const noexcept { return mask_; }
  bool excluded(std::size_t q, std::size_t k) const { return mask_ && mask_->excluded(q, k); }
  std::size_t unmasked_keys(std::size_t q) const {
    return mask_ ? mask_->unmasked_in_row(q) : keys_;
  }

  const std::vector<std::vector<std::size_t>>& clusters() const noexcept { return clusters_; }

  friend bool operator==(const AttentionTensor&, const AttentionTensor&) = default;

 private:
  std::size_t offset(std::size_t layer, std::size_t head, std::size_t q) const {
    return ((layer * heads_ + head) * queries_ + q) * keys_;
  }

  AttentionKind kind_ = AttentionKind::EncoderSelf;
  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
  std::size_t queries_ = 0;
  std::size_t keys_ = 0;
  std::vector<double> entries_;
  std::vector<ShapeParam> shapes_;
  std::optional<MaskMatrix> mask_;
  std::vector<std::vector<std::size_t>> clusters_;
};

}  // namespace adasparse
