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

#include <cstdint>
#include <string_view>
#include <vector>

#include "adasparse/attention.hpp"
#include "adasparse/core/matrix.hpp"
#include "adasparse/core/types.hpp"
#include "adasparse/harness/dataset.hpp"

namespace adasparse {

enum class PiMode { Softmax, Entmax15, Adaptive };

std::string_view to_string(PiMode mode) noexcept;
PiMode pi_mode_from_string(std::string_view name);
ShapePolicy shape_policy(PiMode mode) noexcept;

struct ModelShape {
  std::size_t vocab_size = 32;
  std::size_t seq_len = 16;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 32;
  std::size_t head_dim = 8;
};

/// Token + learned absolute position embeddings, a residual stack of
/// encoder self-attention blocks, and a linear readout over the vocabulary.
struct ToyModel {
  Matrix token_embedding;     // vocab × model_dim
  Matrix position_embedding;  // seq_len × model_dim
  std::vector<MultiHeadBlock> blocks;
  Matrix readout;             // model_dim × vocab
  Matrix readout_bias;        // 1 × vocab

  static ToyModel random(const ModelShape& shape, PiMode mode, std::uint64_t seed);

  std::size_t vocab_size() const noexcept { return token_embedding.rows(); }
  std::size_t seq_len() const noexcept { return position_embedding.rows(); }

  friend bool operator==(const ToyModel&, const ToyModel&) = default;
};

/// Every trainable scalar in a fixed order: embeddings, then per block the
/// head projections, w_out and trainable raw α values, then the readout.
std::vector<double> flatten_parameters(const ToyModel& model);
/// Inverse of flatten_parameters. Throws Error(DimensionMismatch).
void assign_parameters(ToyModel& model, std::span<const double> flat);

struct SequenceForward {
  Matrix embedded;                    // n × model_dim
  std::vector<BlockForward> blocks;   // per layer
  std::vector<Matrix> residual;       // input of each layer, then final
  Matrix logits;                      // n × vocab
};

SequenceForward forward_sequence(const ToyModel& model, std::span<const std::size_t> tokens);

/// Mean token-level cross-entropy of `logits` against `targets`.
double cross_entropy(const Matrix& logits, std::span<const std::size_t> targets);

/// Adds d(scale · cross-entropy)/dθ into `grad` (laid out like
/// flatten_parameters) and returns the unscaled loss.
double accumulate_gradient(const ToyModel& model, const Example& example, double scale,
                           std::span<double> grad);

/// Attention of every layer and head on one sequence.
AttentionTensor attention_tensor(const ToyModel& model, const SequenceForward& forward,
                                 const std::vector<std::vector<std::size_t>>& clusters);

}  // namespace adasparse
