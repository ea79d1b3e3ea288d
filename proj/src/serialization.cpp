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

#include "adasparse/serialization.hpp"

#include <fstream>
#include <string>

namespace adasparse {
namespace {

std::vector<double> to_doubles(const json& j, ErrorCode code) {
  if (!j.is_array()) throw Error(code, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(code, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<bool> to_bools(const json& j, ErrorCode code) {
  if (!j.is_array()) throw Error(code, "expected an array of booleans");
  std::vector<bool> out;
  for (const auto& v : j) {
    if (!v.is_boolean()) throw Error(code, "expected an array of booleans");
    out.push_back(v.get<bool>());
  }
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::DimensionMismatch, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::DimensionMismatch, "matrix must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    auto values = to_doubles(row, ErrorCode::DimensionMismatch);
    if (values.size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    data.insert(data.end(), values.begin(), values.end());
  }
  return Matrix(rows, cols, std::move(data));
}

json to_json(const MaskMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
  return rows;
}

MaskMatrix mask_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::DimensionMismatch, "mask must be a non-empty array of rows");
  const std::size_t cols = j.front().size();
  MaskMatrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = to_bools(j[r], ErrorCode::DimensionMismatch);
    if (row.size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged mask rows");
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, row[c]);
  }
  return m;
}

json to_json(const ScoreVector& z) {
  std::vector<double> scores(z.scores().begin(), z.scores().end());
  if (!z.has_mask()) return scores;
  return json{{"scores", scores}, {"mask", *z.mask()}};
}

ScoreVector score_vector_from_json(const json& j) {
  if (j.is_array()) return ScoreVector(to_doubles(j, ErrorCode::InvalidScores));
  if (j.is_object() && j.contains("scores")) {
    std::optional<std::vector<bool>> mask;
    if (j.contains("mask") && !j.at("mask").is_null()) mask = to_bools(j.at("mask"), ErrorCode::InvalidScores);
    return ScoreVector(to_doubles(j.at("scores"), ErrorCode::InvalidScores), std::move(mask));
  }
  throw Error(ErrorCode::InvalidScores, "expected an array or an object with 'scores'");
}

json to_json(const SimplexPoint& p) {
  return json{{"probs", std::vector<double>(p.probs().begin(), p.probs().end())}, {"support", p.support()}};
}

SimplexPoint simplex_point_from_json(const json& j) {
  const json& probs = j.is_object() ? field(j, "probs") : j;
  const auto values = to_doubles(probs, ErrorCode::NotNormalized);
  return validate_simplex(values);
}

json to_json(const ShapeParam& s) {
  if (s.trainable()) return json{{"alpha", s.alpha()}, {"raw", s.raw()}, {"trainable", true}};
  return json{{"alpha", s.alpha()}, {"trainable", false}};
}

ShapeParam shape_param_from_json(const json& j) {
  if (j.is_number()) return ShapeParam::fixed(j.get<double>());
  if (j.value("trainable", false)) return ShapeParam::from_raw(field(j, "raw").get<double>());
  return ShapeParam::fixed(field(j, "alpha").get<double>());
}

json to_json(const Threshold& t) { return json{{"tau", t.tau}, {"support_size", t.support_size}}; }

json to_json(const EntmaxResult& r) {
  return json{{"probs", std::vector<double>(r.point.probs().begin(), r.point.probs().end())},
              {"tau", r.threshold.tau},
              {"support", r.point.support()}};
}

json to_json(const AttentionTensor& t) {
  json alpha_values = json::array();
  json raw_alpha = json::array();
  bool any_trainable = false;
  json entries = json::array();
  for (std::size_t l = 0; l < t.layers(); ++l) {
    json alphas = json::array();
    json raws = json::array();
    json layer = json::array();
    for (std::size_t h = 0; h < t.heads(); ++h) {
      const ShapeParam& s = t.shape(l, h);
      alphas.push_back(s.alpha());
      raws.push_back(s.trainable() ? json(s.raw()) : json(nullptr));
      any_trainable = any_trainable || s.trainable();
      json head = json::array();
      for (std::size_t q = 0; q < t.queries(); ++q) {
        const auto row = t.row(l, h, q);
        head.push_back(std::vector<double>(row.begin(), row.end()));
      }
      layer.push_back(std::move(head));
    }
    alpha_values.push_back(std::move(alphas));
    raw_alpha.push_back(std::move(raws));
    entries.push_back(std::move(layer));
  }
  json j{{"layers", t.layers()},
         {"heads", t.heads()},
         {"kind", std::string(to_string(t.kind()))},
         {"alpha_values", std::move(alpha_values)},
         {"queries", t.queries()},
         {"keys", t.keys()}};
  if (any_trainable) j["raw_alpha"] = std::move(raw_alpha);
  if (t.mask()) j["mask"] = to_json(*t.mask());
  if (!t.clusters().empty()) j["clusters"] = t.clusters();
  j["entries"] = std::move(entries);
  return j;
}

AttentionTensor attention_tensor_from_json(const json& j) {
  const auto layers = field(j, "layers").get<std::size_t>();
  const auto heads = field(j, "heads").get<std::size_t>();
  const AttentionKind kind = attention_kind_from_string(field(j, "kind").get<std::string>());
  const json& alpha_values = field(j, "alpha_values");
  const json& entries = field(j, "entries");
  const json* raw_alpha = j.contains("raw_alpha") ? &j.at("raw_alpha") : nullptr;
  if (alpha_values.size() != layers || entries.size() != layers)
    throw Error(ErrorCode::DimensionMismatch, "layer count disagrees with the header");

  std::size_t queries = j.value("queries", std::size_t{0});
  std::size_t keys = j.value("keys", std::size_t{0});
  if (queries == 0 && layers > 0 && !entries[0].empty()) queries = entries[0][0].size();
  if (keys == 0 && queries > 0) keys = entries[0][0][0].size();

  std::vector<ShapeParam> shapes;
  std::vector<double> flat;
  flat.reserve(layers * heads * queries * keys);
  for (std::size_t l = 0; l < layers; ++l) {
    if (alpha_values[l].size() != heads || entries[l].size() != heads)
      throw Error(ErrorCode::DimensionMismatch, "head count disagrees with the header");
    for (std::size_t h = 0; h < heads; ++h) {
      const json* raw = raw_alpha != nullptr ? &(*raw_alpha)[l][h] : nullptr;
      if (raw != nullptr && raw->is_number()) {
        shapes.push_back(ShapeParam::from_raw(raw->get<double>()));
      } else {
        shapes.push_back(ShapeParam::fixed(alpha_values[l][h].get<double>()));
      }
      const json& head = entries[l][h];
      if (head.size() != queries) throw Error(ErrorCode::DimensionMismatch, "query count mismatch");
      for (const auto& row : head) {
        const auto values = to_doubles(row, ErrorCode::DimensionMismatch);
        if (values.size() != keys) throw Error(ErrorCode::DimensionMismatch, "key count mismatch");
        flat.insert(flat.end(), values.begin(), values.end());
      }
    }
  }
  std::optional<MaskMatrix> mask;
  if (j.contains("mask") && !j.at("mask").is_null()) mask = mask_from_json(j.at("mask"));
  std::vector<std::vector<std::size_t>> clusters;
  if (j.contains("clusters")) clusters = j.at("clusters").get<std::vector<std::vector<std::size_t>>>();
  return AttentionTensor(kind, layers, heads, queries, keys, std::move(flat), std::move(shapes),
                         std::move(mask), std::move(clusters));
}

json to_json(const MultiHeadBlock& block) {
  json heads = json::array();
  json shapes = json::array();
  for (std::size_t h = 0; h < block.num_heads(); ++h) {
    const HeadProjection& p = block.heads[h];
    heads.push_back(json{{"w_q", to_json(p.w_q)}, {"w_k", to_json(p.w_k)}, {"w_v", to_json(p.w_v)}});
    shapes.push_back(to_json(block.shapes[h]));
  }
  return json{{"kind", std::string(to_string(block.kind))},
              {"heads", std::move(heads)},
              {"shapes", std::move(shapes)},
              {"w_out", to_json(block.w_out)}};
}

MultiHeadBlock block_from_json(const json& j) {
  MultiHeadBlock block;
  block.kind = attention_kind_from_string(field(j, "kind").get<std::string>());
  for (const auto& h : field(j, "heads")) {
    block.heads.push_back(HeadProjection{matrix_from_json(field(h, "w_q")), matrix_from_json(field(h, "w_k")),
                                         matrix_from_json(field(h, "w_v"))});
  }
  for (const auto& s : field(j, "shapes")) block.shapes.push_back(shape_param_from_json(s));
  block.w_out = matrix_from_json(field(j, "w_out"));
  block.validate();
  return block;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j, int indent) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(indent) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace adasparse
