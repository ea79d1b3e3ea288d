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

// JSON forms of the domain types. Vectors are plain arrays of numbers;
// matrices are arrays of rows; attention tensors carry a metadata header
// (layers, heads, kind, alpha_values) next to their nested entries.

#include <filesystem>

#include "json.hpp"

#include "adasparse/attention.hpp"
#include "adasparse/core/matrix.hpp"
#include "adasparse/core/types.hpp"
#include "adasparse/transforms.hpp"

namespace adasparse {

using nlohmann::json;

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const MaskMatrix& m);
MaskMatrix mask_from_json(const json& j);

/// Plain array, or {"scores": [...], "mask": [...]} when masked.
json to_json(const ScoreVector& z);
/// Accepts either form above. Throws Error(InvalidScores) on malformed input.
ScoreVector score_vector_from_json(const json& j);

json to_json(const SimplexPoint& p);
/// Validates with validate_simplex at the default tolerance.
SimplexPoint simplex_point_from_json(const json& j);

json to_json(const ShapeParam& s);
ShapeParam shape_param_from_json(const json& j);

json to_json(const Threshold& t);

/// {"probs", "tau", "support"}
json to_json(const EntmaxResult& r);

json to_json(const AttentionTensor& t);
/// Re-validates every tensor invariant.
AttentionTensor attention_tensor_from_json(const json& j);

json to_json(const MultiHeadBlock& block);
MultiHeadBlock block_from_json(const json& j);

/// Throws Error(Io) when the file cannot be opened or parsed.
json read_json_file(const std::filesystem::path& path);
/// Writes `j` followed by a newline. Throws Error(Io).
void write_json_file(const std::filesystem::path& path, const json& j, int indent = 2);

}  // namespace adasparse
