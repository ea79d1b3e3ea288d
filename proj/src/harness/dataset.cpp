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

#include "adasparse/harness/dataset.hpp"

#include <string>

#include "adasparse/core/error.hpp"
#include "adasparse/core/rng.hpp"

namespace adasparse {
namespace {

Example make_example(const ToyTaskSpec& spec, Rng& rng) {
  const std::size_t n = spec.seq_len;
  const std::size_t vocab = spec.vocab_size;
  Example ex;
  ex.tokens.resize(n);
  ex.targets.resize(n);

  if (spec.task != ToyTask::ClusterSum) {
    for (auto& tok : ex.tokens) tok = 1 + rng.below(vocab - 1);
    for (std::size_t t = 0; t < n; ++t) {
      ex.clusters.push_back({t});
      if (spec.task == ToyTask::PrevToken) {
        ex.targets[t] = t == 0 ? kReservedToken : ex.tokens[t - 1];
      } else {
        ex.targets[t] = t + 1 == n ? kReservedToken : ex.tokens[t + 1];
      }
    }
    return ex;
  }

  // Word-start tokens in [1, split), continuations in [split, vocab).
  const bool split_vocab = vocab >= 4;
  const std::size_t split = split_vocab ? vocab / 2 : vocab;
  std::size_t t = 0;
  while (t < n) {
    const std::size_t size = std::min<std::size_t>(1 + rng.below(spec.max_cluster_size), n - t);
    std::vector<std::size_t> cluster;
    std::size_t sum = 0;
    for (std::size_t j = 0; j < size; ++j) {
      std::size_t tok;
      if (j == 0 || !split_vocab) {
        tok = 1 + rng.below(split - 1);
      } else {
        tok = split + rng.below(vocab - split);
      }
      ex.tokens[t + j] = tok;
      sum += tok;
      cluster.push_back(t + j);
    }
    for (std::size_t idx : cluster) ex.targets[idx] = 1 + sum % (vocab - 1);
    ex.clusters.push_back(std::move(cluster));
    t += size;
  }
  return ex;
}

}  // namespace

std::string_view to_string(ToyTask task) noexcept {
  switch (task) {
    case ToyTask::PrevToken: return "prev-token";
    case ToyTask::NextToken: return "next-token";
    case ToyTask::ClusterSum: return "cluster-sum";
  }
  return "unknown";
}

ToyTask toy_task_from_string(std::string_view name) {
  if (name == "prev-token") return ToyTask::PrevToken;
  if (name == "next-token") return ToyTask::NextToken;
  if (name == "cluster-sum") return ToyTask::ClusterSum;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(name) + "'");
}

void ToyTaskSpec::validate() const {
  if (seq_len < 2) throw Error(ErrorCode::InvalidConfig, "seq_len must be >= 2");
  if (vocab_size < 2) throw Error(ErrorCode::InvalidConfig, "vocab_size must be >= 2");
  if (max_cluster_size < 1) throw Error(ErrorCode::InvalidConfig, "max_cluster_size must be >= 1");
}

ToyDataset generate_dataset(const ToyTaskSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  ToyDataset data;
  data.train.reserve(spec.n_train);
  data.eval.reserve(spec.n_eval);
  for (std::size_t i = 0; i < spec.n_train; ++i) data.train.push_back(make_example(spec, rng));
  for (std::size_t i = 0; i < spec.n_eval; ++i) data.eval.push_back(make_example(spec, rng));
  return data;
}

}  // namespace adasparse
