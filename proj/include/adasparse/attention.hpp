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

// Scaled dot-product and multi-head attention with an α-entmax row
// normalizer, plus the hand-derived backward pass through the whole block
// (projections, output map, scores and the per-head α).

#include <optional>
#include <vector>

#include "adasparse/core/matrix.hpp"
#include "adasparse/core/rng.hpp"
#include "adasparse/core/types.hpp"

namespace adasparse {

/// Learned maps of one head; each is model_dim × head_dim.
struct HeadProjection {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;

  friend bool operator==(const HeadProjection&, const HeadProjection&) = default;
};

/// How a block's α values are set up.
enum class ShapePolicy {
  Softmax,   // fixed α = 1
  Entmax15,  // fixed α = 1.5
  Adaptive,  // trainable raw α, α = 1 + sigmoid(raw)
};

struct MultiHeadBlock {
  std::vector<HeadProjection> heads;
  std::vector<ShapeParam> shapes;
  Matrix w_out;  // (H·head_dim) × model_dim
  AttentionKind kind = AttentionKind::EncoderSelf;

  std::size_t num_heads() const noexcept { return heads.size(); }
  std::size_t model_dim() const noexcept { return heads.empty() ? 0 : heads.front().w_q.rows(); }
  std::size_t head_dim() const noexcept { return heads.empty() ? 0 : heads.front().w_q.cols(); }

  /// Throws Error(DimensionMismatch) on inconsistent shapes or non-finite
  /// weights.
  void validate() const;

  /// Projections uniform in [−1/√fan_in, 1/√fan_in]; adaptive raw α uniform
  /// in [−1, 1].
  static MultiHeadBlock random(std::size_t num_heads, std::size_t model_dim, std::size_t head_dim,
                               AttentionKind kind, ShapePolicy policy, Rng& rng);

  friend bool operator==(const MultiHeadBlock&, const MultiHeadBlock&) = default;
};

/// Attention map of one head: rows are simplex points over the keys.
struct HeadAttention {
  Matrix weights;  // n × m
  ShapeParam shape;
};

struct AttentionOutput {
  Matrix output;  // n × d_v
  HeadAttention attention;
};

/// π(QKᵀ/√d)V with π = α-entmax applied row-wise. `mask` (n × m, true =
/// excluded) is optional.
/// Throws Error(AllMaskedRow) if some query row has no unmasked key and
/// Error(DimensionMismatch) on inconsistent operands.
AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                                     const ShapeParam& shape,
                                     const std::optional<MaskMatrix>& mask = std::nullopt);

/// Everything the backward pass reuses from the forward pass.
struct BlockForward {
  Matrix q_in, k_in, v_in;
  std::optional<MaskMatrix> mask;
  std::vector<Matrix> q_proj, k_proj, v_proj;  // per head
  std::vector<HeadAttention> attention;         // per head
  Matrix concat;                                // n × (H·head_dim)
  Matrix output;                                // n × model_dim
};

BlockForward multi_head_forward(const MultiHeadBlock& block, const Matrix& q, const Matrix& k,
                                const Matrix& v, const std::optional<MaskMatrix>& mask = std::nullopt);

struct BlockGradients {
  std::vector<HeadProjection> heads;
  Matrix w_out;
  std::vector<double> raw_alpha;  // zero for fixed shapes
  Matrix q, k, v;                 // w.r.t. the block inputs
};

/// Exact gradients of ⟨upstream, output⟩ w.r.t. every block parameter and
/// input. α gradients go through the sigmoid parametrization.
BlockGradients multi_head_backward(const MultiHeadBlock& block, const BlockForward& forward,
                                   const Matrix& upstream);

/// mask[i][j] = excluded iff j > i.
MaskMatrix causal_mask(std::size_t n);

}  // namespace adasparse
