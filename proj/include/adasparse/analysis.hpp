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

// Interpretability metrics over attention tensors: density, head diversity
// (generalized Jensen-Shannon), positional confidence and cluster-merge
// score, plus the α trajectory log and the report that bundles them.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "adasparse/core/matrix.hpp"
#include "adasparse/core/types.hpp"

namespace adasparse {

/// A key is visible to a query unless masked or, for decoder self-attention,
/// in the future.
bool key_visible(const AttentionTensor& t, std::size_t query, std::size_t key);
std::size_t visible_keys(const AttentionTensor& t, std::size_t query);

/// Per (layer, head): mean over query rows of |{j : p_j > eps}| / visible
/// keys. Rows of all tensors are pooled; tensors must agree on layers/heads.
Matrix attention_density(std::span<const AttentionTensor> tensors, double eps = 0.0);
Matrix attention_density(const AttentionTensor& tensor, double eps = 0.0);

/// H^S(mean_j p_j) − mean_j H^S(p_j), both entropies in base d. Result in
/// [0, 1]. Throws Error(DimensionMismatch) for fewer than two rows, rows of
/// unequal length, or d < 2.
double js_divergence(std::span<const std::vector<double>> rows);

/// Per layer: js_divergence across heads, computed for every (query,
/// sequence) over that query's visible keys, then averaged. Queries with
/// fewer than two visible keys are skipped.
std::vector<double> js_per_layer(std::span<const AttentionTensor> tensors);

/// Per (layer, head): mean over queries t of p[t][t + offset], skipping
/// positions where t + offset is out of range or not visible.
/// Throws Error(NoValidPositions) when nothing qualifies.
Matrix positional_confidence(std::span<const AttentionTensor> tensors, long offset);
Matrix positional_confidence(const AttentionTensor& tensor, long offset);

/// Checks that `clusters` partition {0, …, n−1}. Throws Error(InvalidPartition).
void validate_partition(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n);

/// Per head of `layer`: for each cluster the largest within-cluster mass
/// Σ_{j∈C} p[t][j] over members t, averaged over clusters. A singleton
/// scores the weight its token puts on itself.
std::vector<double> cluster_merge_score(const AttentionTensor& tensor, std::size_t layer,
                                        const std::vector<std::vector<std::size_t>>& clusters);

struct AlphaRecord {
  long step;
  AttentionKind kind;
  std::size_t layer;
  std::size_t head;
  double alpha;
};

/// Append-only (step, kind, layer, head, α) log.
class AlphaTrajectory {
 public:
  void log(long step, AttentionKind kind, std::size_t layer, std::span<const ShapeParam> shapes);
  const std::vector<AlphaRecord>& records() const noexcept { return records_; }
  /// Header "step,kind,layer,head,alpha" then one line per record.
  std::string to_csv() const;

 private:
  std::vector<AlphaRecord> records_;
};

struct HeadValue {
  AttentionKind kind;
  std::size_t layer;
  std::size_t head;
  double value;
};

struct LayerValue {
  AttentionKind kind;
  std::size_t layer;
  double value;
};

struct OffsetValue {
  AttentionKind kind;
  std::size_t layer;
  std::size_t head;
  long offset;
  double value;
};

struct MetricReport {
  std::size_t sequences = 0;
  std::vector<HeadValue> densities;
  std::vector<LayerValue> js_per_layer;
  std::vector<OffsetValue> positional_confidence;
  std::vector<HeadValue> alpha_snapshot;
  std::optional<std::vector<HeadValue>> cluster_scores;

  /// Throws Error(DimensionMismatch) if any value is outside its range.
  void validate() const;
  nlohmann::json to_json() const;

  std::optional<double> density(AttentionKind kind, std::size_t layer, std::size_t head) const;
  std::optional<double> confidence(AttentionKind kind, std::size_t layer, std::size_t head,
                                   long offset) const;
};

struct AnalysisOptions {
  double eps = 0.0;
  std::vector<long> offsets{-1, 0, 1};
};

/// Groups tensors by attention kind and computes every metric per group.
/// Cluster scores are reported when every self-attention tensor carries
/// clusters.
MetricReport analyze(std::span<const AttentionTensor> tensors, const AnalysisOptions& options = {});

/// Reads every *.json file under `dir` in lexicographic order.
std::vector<AttentionTensor> load_tensors(const std::filesystem::path& dir);

/// One CSV per metric (columns layer, head, metric, value) in `dir`.
void write_metric_csvs(const MetricReport& report, const std::filesystem::path& dir);

}  // namespace adasparse
