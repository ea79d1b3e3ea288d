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

#include "adasparse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "adasparse/serialization.hpp"
#include "adasparse/transforms.hpp"

namespace adasparse {
namespace {

void require_same_layout(std::span<const AttentionTensor> tensors) {
  if (tensors.empty()) throw Error(ErrorCode::DimensionMismatch, "no attention tensors given");
  const AttentionTensor& first = tensors.front();
  for (const auto& t : tensors) {
    if (t.layers() != first.layers() || t.heads() != first.heads() || t.kind() != first.kind())
      throw Error(ErrorCode::DimensionMismatch, "tensors disagree on kind, layers or heads");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool in_unit_interval(double v) { return v >= -1e-12 && v <= 1.0 + 1e-9; }

}  // namespace

bool key_visible(const AttentionTensor& t, std::size_t query, std::size_t key) {
  if (t.excluded(query, key)) return false;
  return !(t.kind() == AttentionKind::DecoderSelf && key > query);
}

std::size_t visible_keys(const AttentionTensor& t, std::size_t query) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < t.keys(); ++k) n += key_visible(t, query, k) ? 1 : 0;
  return n;
}

Matrix attention_density(std::span<const AttentionTensor> tensors, double eps) {
  require_same_layout(tensors);
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidConfig, "density threshold must be >= 0");
  const auto& first = tensors.front();
  Matrix total(first.layers(), first.heads());
  Matrix rows(first.layers(), first.heads());
  for (const auto& t : tensors) {
    for (std::size_t q = 0; q < t.queries(); ++q) {
      const double visible = static_cast<double>(visible_keys(t, q));
      for (std::size_t l = 0; l < t.layers(); ++l) {
        for (std::size_t h = 0; h < t.heads(); ++h) {
          const auto row = t.row(l, h, q);
          std::size_t nonzero = 0;
          for (std::size_t k = 0; k < t.keys(); ++k) nonzero += row[k] > eps ? 1 : 0;
          total(l, h) += static_cast<double>(nonzero) / visible;
          rows(l, h) += 1.0;
        }
      }
    }
  }
  for (std::size_t i = 0; i < total.size(); ++i) total.flat()[i] /= rows.flat()[i];
  return total;
}

Matrix attention_density(const AttentionTensor& tensor, double eps) {
  return attention_density(std::span<const AttentionTensor>(&tensor, 1), eps);
}

double js_divergence(std::span<const std::vector<double>> rows) {
  if (rows.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two heads");
  const std::size_t d = rows.front().size();
  if (d < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two tokens");
  std::vector<double> mean(d, 0.0);
  double mean_entropy = 0.0;
  for (const auto& row : rows) {
    if (row.size() != d) throw Error(ErrorCode::DimensionMismatch, "heads differ in row length");
    for (std::size_t i = 0; i < d; ++i) mean[i] += row[i];
    mean_entropy += shannon_entropy(row);
  }
  const double count = static_cast<double>(rows.size());
  for (double& v : mean) v /= count;
  mean_entropy /= count;
  const double js = (shannon_entropy(mean) - mean_entropy) / std::log(static_cast<double>(d));
  return std::clamp(js, 0.0, 1.0);
}

std::vector<double> js_per_layer(std::span<const AttentionTensor> tensors) {
  require_same_layout(tensors);
  const std::size_t layers = tensors.front().layers();
  const std::size_t heads = tensors.front().heads();
  std::vector<double> total(layers, 0.0);
  std::vector<double> count(layers, 0.0);
  if (heads < 2) return total;
  std::vector<std::vector<double>> head_rows(heads);
  for (const auto& t : tensors) {
    for (std::size_t q = 0; q < t.queries(); ++q) {
      std::vector<std::size_t> keys;
      for (std::size_t k = 0; k < t.keys(); ++k)
        if (key_visible(t, q, k)) keys.push_back(k);
      if (keys.size() < 2) continue;
      for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t h = 0; h < heads; ++h) {
          const auto row = t.row(l, h, q);
          head_rows[h].resize(keys.size());
          for (std::size_t j = 0; j < keys.size(); ++j) head_rows[h][j] = row[keys[j]];
        }
        total[l] += js_divergence(head_rows);
        count[l] += 1.0;
      }
    }
  }
  for (std::size_t l = 0; l < layers; ++l) total[l] = count[l] > 0.0 ? total[l] / count[l] : 0.0;
  return total;
}

Matrix positional_confidence(std::span<const AttentionTensor> tensors, long offset) {
  require_same_layout(tensors);
  const auto& first = tensors.front();
  Matrix total(first.layers(), first.heads());
  double count = 0.0;
  for (const auto& t : tensors) {
    for (std::size_t q = 0; q < t.queries(); ++q) {
      const long target = static_cast<long>(q) + offset;
      if (target < 0 || target >= static_cast<long>(t.keys())) continue;
      const auto k = static_cast<std::size_t>(target);
      if (!key_visible(t, q, k)) continue;
      for (std::size_t l = 0; l < t.layers(); ++l)
        for (std::size_t h = 0; h < t.heads(); ++h) total(l, h) += t.at(l, h, q, k);
      count += 1.0;
    }
  }
  if (count == 0.0)
    throw Error(ErrorCode::NoValidPositions, "no query has a visible key at offset " + std::to_string(offset));
  total *= 1.0 / count;
  return total;
}

Matrix positional_confidence(const AttentionTensor& tensor, long offset) {
  return positional_confidence(std::span<const AttentionTensor>(&tensor, 1), offset);
}

void validate_partition(const std::vector<std::vector<std::size_t>>& clusters, std::size_t n) {
  std::vector<bool> seen(n, false);
  std::size_t covered = 0;
  for (const auto& c : clusters) {
    if (c.empty()) throw Error(ErrorCode::InvalidPartition, "empty cluster");
    for (std::size_t i : c) {
      if (i >= n) throw Error(ErrorCode::InvalidPartition, "cluster index " + std::to_string(i) + " out of range");
      if (seen[i]) throw Error(ErrorCode::InvalidPartition, "token " + std::to_string(i) + " is in two clusters");
      seen[i] = true;
      ++covered;
    }
  }
  if (covered != n) throw Error(ErrorCode::InvalidPartition, "clusters do not cover every token");
}

std::vector<double> cluster_merge_score(const AttentionTensor& tensor, std::size_t layer,
                                        const std::vector<std::vector<std::size_t>>& clusters) {
  if (tensor.queries() != tensor.keys())
    throw Error(ErrorCode::InvalidPartition, "cluster scores need self-attention (queries == keys)");
  if (layer >= tensor.layers()) throw Error(ErrorCode::DimensionMismatch, "layer out of range");
  validate_partition(clusters, tensor.queries());
  std::vector<double> scores(tensor.heads(), 0.0);
  for (std::size_t h = 0; h < tensor.heads(); ++h) {
    for (const auto& cluster : clusters) {
      double best = 0.0;
      for (std::size_t t : cluster) {
        double mass = 0.0;
        for (std::size_t j : cluster) mass += tensor.at(layer, h, t, j);
        best = std::max(best, mass);
      }
      scores[h] += best;
    }
    scores[h] /= static_cast<double>(clusters.size());
  }
  return scores;
}

void AlphaTrajectory::log(long step, AttentionKind kind, std::size_t layer,
                          std::span<const ShapeParam> shapes) {
  for (std::size_t h = 0; h < shapes.size(); ++h)
    records_.push_back(AlphaRecord{step, kind, layer, h, shapes[h].alpha()});
}

std::string AlphaTrajectory::to_csv() const {
  std::ostringstream out;
  out << "step,kind,layer,head,alpha\n";
  for (const auto& r : records_)
    out << r.step << ',' << to_string(r.kind) << ',' << r.layer << ',' << r.head << ','
        << format_double(r.alpha) << '\n';
  return out.str();
}

void MetricReport::validate() const {
  const auto check = [](double v, const char* what) {
    if (!in_unit_interval(v)) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " outside [0, 1]");
  };
  for (const auto& v : densities) check(v.value, "density");
  for (const auto& v : js_per_layer) check(v.value, "JS divergence");
  for (const auto& v : positional_confidence) check(v.value, "positional confidence");
  for (const auto& v : alpha_snapshot)
    if (!(v.value >= 1.0)) throw Error(ErrorCode::DimensionMismatch, "alpha below 1");
  if (cluster_scores)
    for (const auto& v : *cluster_scores) check(v.value, "cluster score");
}

nlohmann::json MetricReport::to_json() const {
  using nlohmann::json;
  const auto head_values = [](const std::vector<HeadValue>& values) {
    json arr = json::array();
    for (const auto& v : values)
      arr.push_back(json{{"kind", std::string(adasparse::to_string(v.kind))},
                         {"layer", v.layer},
                         {"head", v.head},
                         {"value", v.value}});
    return arr;
  };
  json js = json::array();
  for (const auto& v : js_per_layer)
    js.push_back(json{{"kind", std::string(adasparse::to_string(v.kind))}, {"layer", v.layer}, {"value", v.value}});
  json conf = json::array();
  for (const auto& v : positional_confidence)
    conf.push_back(json{{"kind", std::string(adasparse::to_string(v.kind))},
                        {"layer", v.layer},
                        {"head", v.head},
                        {"offset", v.offset},
                        {"value", v.value}});
  json out{{"sequences", sequences},
           {"densities", head_values(densities)},
           {"js_per_layer", std::move(js)},
           {"positional_confidence", std::move(conf)},
           {"alpha_snapshot", head_values(alpha_snapshot)}};
  out["cluster_scores"] = cluster_scores ? head_values(*cluster_scores) : json(nullptr);
  return out;
}

std::optional<double> MetricReport::density(AttentionKind kind, std::size_t layer, std::size_t head) const {
  for (const auto& v : densities)
    if (v.kind == kind && v.layer == layer && v.head == head) return v.value;
  return std::nullopt;
}

std::optional<double> MetricReport::confidence(AttentionKind kind, std::size_t layer, std::size_t head,
                                               long offset) const {
  for (const auto& v : positional_confidence)
    if (v.kind == kind && v.layer == layer && v.head == head && v.offset == offset) return v.value;
  return std::nullopt;
}

MetricReport analyze(std::span<const AttentionTensor> tensors, const AnalysisOptions& options) {
  MetricReport report;
  std::map<AttentionKind, std::vector<AttentionTensor>> groups;
  for (const auto& t : tensors) groups[t.kind()].push_back(t);
  if (!groups.empty()) report.sequences = groups.begin()->second.size();

  bool all_clustered = true;
  std::vector<HeadValue> cluster_values;
  for (const auto& [kind, group] : groups) {
    const Matrix density = attention_density(group, options.eps);
    const std::vector<double> js = js_per_layer(group);
    const AttentionTensor& first = group.front();
    for (std::size_t l = 0; l < first.layers(); ++l) {
      report.js_per_layer.push_back({kind, l, js[l]});
      for (std::size_t h = 0; h < first.heads(); ++h) {
        report.densities.push_back({kind, l, h, density(l, h)});
        report.alpha_snapshot.push_back({kind, l, h, first.shape(l, h).alpha()});
      }
    }
    for (long offset : options.offsets) {
      Matrix conf;
      try {
        conf = positional_confidence(group, offset);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidPositions) throw;
        continue;
      }
      for (std::size_t l = 0; l < first.layers(); ++l)
        for (std::size_t h = 0; h < first.heads(); ++h)
          report.positional_confidence.push_back({kind, l, h, offset, conf(l, h)});
    }

    if (kind == AttentionKind::Context) continue;
    Matrix cluster_total(first.layers(), first.heads());
    for (const auto& t : group) {
      if (t.clusters().empty()) {
        all_clustered = false;
        break;
      }
      for (std::size_t l = 0; l < t.layers(); ++l) {
        const auto scores = cluster_merge_score(t, l, t.clusters());
        for (std::size_t h = 0; h < t.heads(); ++h) cluster_total(l, h) += scores[h];
      }
    }
    if (!all_clustered) continue;
    for (std::size_t l = 0; l < first.layers(); ++l)
      for (std::size_t h = 0; h < first.heads(); ++h)
        cluster_values.push_back({kind, l, h, cluster_total(l, h) / static_cast<double>(group.size())});
  }
  if (all_clustered && !cluster_values.empty()) report.cluster_scores = std::move(cluster_values);
  report.validate();
  return report;
}

std::vector<AttentionTensor> load_tensors(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<AttentionTensor> tensors;
  tensors.reserve(files.size());
  for (const auto& f : files) tensors.push_back(attention_tensor_from_json(read_json_file(f)));
  return tensors;
}

void write_metric_csvs(const MetricReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    out << "layer,head,metric,value\n";
    return out;
  };
  const auto write_heads = [&](const char* file, const std::vector<HeadValue>& values, const char* metric) {
    auto out = open(file);
    for (const auto& v : values)
      out << v.layer << ',' << v.head << ',' << to_string(v.kind) << '/' << metric << ','
          << format_double(v.value) << '\n';
  };
  write_heads("density.csv", report.densities, "density");
  write_heads("alpha.csv", report.alpha_snapshot, "alpha");
  if (report.cluster_scores) write_heads("cluster_merge.csv", *report.cluster_scores, "cluster_merge");
  {
    auto out = open("js_divergence.csv");
    for (const auto& v : report.js_per_layer)
      out << v.layer << ",," << to_string(v.kind) << "/js_divergence," << format_double(v.value) << '\n';
  }
  {
    auto out = open("positional_confidence.csv");
    for (const auto& v : report.positional_confidence)
      out << v.layer << ',' << v.head << ',' << to_string(v.kind) << "/positional_confidence@" << v.offset
          << ',' << format_double(v.value) << '\n';
  }
}

}  // namespace adasparse
