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

namespace adasparse {

enum class ToyTask { PrevToken, NextToken, ClusterSum };

std::string_view to_string(ToyTask task) noexcept;
/// Throws Error(InvalidConfig) for unknown names.
ToyTask toy_task_from_string(std::string_view name);

/// Token 0 is reserved (sequence boundary); inputs are drawn from
/// [1, vocab_size).
inline constexpr std::size_t kReservedToken = 0;

struct ToyTaskSpec {
  ToyTask task = ToyTask::PrevToken;
  std::size_t vocab_size = 32;
  std::size_t seq_len = 16;
  std::size_t n_train = 2048;
  std::size_t n_eval = 64;
  std::uint64_t seed = 1;
  /// Largest cluster drawn by the cluster-sum task (1 gives singletons only).
  std::size_t max_cluster_size = 3;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct Example {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> targets;
  /// Contiguous token clusters partitioning the positions. Singletons for
  /// tasks without cluster structure.
  std::vector<std::vector<std::size_t>> clusters;

  friend bool operator==(const Example&, const Example&) = default;
};

struct ToyDataset {
  std::vector<Example> train;
  std::vector<Example> eval;

  friend bool operator==(const ToyDataset&, const ToyDataset&) = default;
};

/// prev-token:  target[t] = token[t−1], target[0] = reserved.
/// next-token:  target[t] = token[t+1], last target = reserved.
/// cluster-sum: positions are split into contiguous clusters of 1..max
///   tokens; the first token of a cluster comes from the lower half of the
///   vocabulary and continuation tokens from the upper half, which marks the
///   boundaries. Every target in a cluster is 1 + (Σ cluster tokens) mod
///   (vocab_size − 1).
ToyDataset generate_dataset(const ToyTaskSpec& spec);

}  // namespace adasparse
