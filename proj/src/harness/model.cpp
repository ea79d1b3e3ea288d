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

#include "adasparse/harness/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adasparse/core/rng.hpp"

namespace adasparse {
namespace {

void append(std::vector<double>& out, const Matrix& m) {
  out.insert(out.end(), m.flat().begin(), m.flat().end());
}

void take(Matrix& m, std::span<const double> flat, std::size_t& pos) {
  if (pos + m.size() > flat.size()) throw Error(ErrorCode::DimensionMismatch, "parameter vector too short");
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), m.size(), m.flat().begin());
  pos += m.size();
}

// Adds `m` into grad at `pos` and advances.
void scatter(std::span<double> grad, const Matrix& m, std::size_t& pos) {
  const auto src = m.flat();
  for (std::size_t i = 0; i < src.size(); ++i) grad[pos + i] += src[i];
  pos += src.size();
}

constexpr double kTokenInitBound = 0.1;
constexpr double kPositionInitBound = 0.3;

Matrix uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

std::string_view to_string(PiMode mode) noexcept {
  switch (mode) {
    case PiMode::Softmax: return "softmax";
    case PiMode::Entmax15: return "entmax15";
    case PiMode::Adaptive: return "adaptive";
  }
  return "unknown";
}

PiMode pi_mode_from_string(std::string_view name) {
  if (name == "softmax") return PiMode::Softmax;
  if (name == "entmax15") return PiMode::Entmax15;
  if (name == "adaptive") return PiMode::Adaptive;
  throw Error(ErrorCode::InvalidConfig, "unknown pi_mode '" + std::string(name) + "'");
}

ShapePolicy shape_policy(PiMode mode) noexcept {
  switch (mode) {
    case PiMode::Softmax: return ShapePolicy::Softmax;
    case PiMode::Entmax15: return ShapePolicy::Entmax15;
    case PiMode::Adaptive: return ShapePolicy::Adaptive;
  }
  return ShapePolicy::Adaptive;
}

ToyModel ToyModel::random(const ModelShape& shape, PiMode mode, std::uint64_t seed) {
  Rng rng(seed);
  ToyModel m;
  m.token_embedding = uniform(shape.vocab_size, shape.model_dim, kTokenInitBound, rng);
  m.position_embedding = uniform(shape.seq_len, shape.model_dim, kPositionInitBound, rng);
  for (std::size_t l = 0; l < shape.layers; ++l) {
    m.blocks.push_back(MultiHeadBlock::random(shape.heads, shape.model_dim, shape.head_dim,
                                              AttentionKind::EncoderSelf, shape_policy(mode), rng));
  }
  m.readout = uniform(shape.model_dim, shape.vocab_size, 1.0 / std::sqrt(static_cast<double>(shape.model_dim)), rng);
  m.readout_bias = Matrix(1, shape.vocab_size);
  return m;
}

std::vector<double> flatten_parameters(const ToyModel& model) {
  std::vector<double> out;
  append(out, model.token_embedding);
  append(out, model.position_embedding);
  for (const auto& block : model.blocks) {
    for (const auto& h : block.heads) {
      append(out, h.w_q);
      append(out, h.w_k);
      append(out, h.w_v);
    }
    append(out, block.w_out);
    for (const auto& s : block.shapes)
      if (s.trainable()) out.push_back(s.raw());
  }
  append(out, model.readout);
  append(out, model.readout_bias);
  return out;
}

void assign_parameters(ToyModel& model, std::span<const double> flat) {
  std::size_t pos = 0;
  take(model.token_embedding, flat, pos);
  take(model.position_embedding, flat, pos);
  for (auto& block : model.blocks) {
    for (auto& h : block.heads) {
      take(h.w_q, flat, pos);
      take(h.w_k, flat, pos);
      take(h.w_v, flat, pos);
    }
    take(block.w_out, flat, pos);
    for (auto& s : block.shapes) {
      if (!s.trainable()) continue;
      if (pos >= flat.size()) throw Error(ErrorCode::DimensionMismatch, "parameter vector too short");
      s = ShapeParam::from_raw(flat[pos++]);
    }
  }
  take(model.readout, flat, pos);
  take(model.readout_bias, flat, pos);
  if (pos != flat.size()) throw Error(ErrorCode::DimensionMismatch, "parameter vector too long");
}

SequenceForward forward_sequence(const ToyModel& model, std::span<const std::size_t> tokens) {
  const std::size_t n = tokens.size();
  if (n == 0 || n > model.seq_len()) throw Error(ErrorCode::DimensionMismatch, "sequence length out of range");
  const std::size_t dm = model.token_embedding.cols();
  SequenceForward f;
  f.embedded = Matrix(n, dm);
  for (std::size_t t = 0; t < n; ++t) {
    if (tokens[t] >= model.vocab_size()) throw Error(ErrorCode::DimensionMismatch, "token id out of range");
    auto row = f.embedded.row(t);
    const auto tok = model.token_embedding.row(tokens[t]);
    const auto pos = model.position_embedding.row(t);
    for (std::size_t c = 0; c < dm; ++c) row[c] = tok[c] + pos[c];
  }
  Matrix x = f.embedded;
  for (const auto& block : model.blocks) {
    f.residual.push_back(x);
    f.blocks.push_back(multi_head_forward(block, x, x, x));
    x += f.blocks.back().output;
  }
  f.residual.push_back(x);
  f.logits = matmul(x, model.readout);
  for (std::size_t t = 0; t < n; ++t) {
    auto row = f.logits.row(t);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += model.readout_bias(0, c);
  }
  return f;
}

double cross_entropy(const Matrix& logits, std::span<const std::size_t> targets) {
  double loss = 0.0;
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    const auto row = logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    loss += mx + std::log(z) - row[targets[t]];
  }
  return loss / static_cast<double>(logits.rows());
}

double accumulate_gradient(const ToyModel& model, const Example& example, double scale,
                           std::span<double> grad) {
  const SequenceForward f = forward_sequence(model, example.tokens);
  const double loss = cross_entropy(f.logits, example.targets);
  const std::size_t n = example.tokens.size();

  // d loss / d logits = (softmax − onehot) / n
  Matrix d_logits = f.logits;
  for (std::size_t t = 0; t < n; ++t) {
    auto row = d_logits.row(t);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
    row[example.targets[t]] -= 1.0;
  }
  d_logits *= scale / static_cast<double>(n);

  const Matrix d_readout = matmul_tn(f.residual.back(), d_logits);
  Matrix d_bias(1, d_logits.cols());
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < d_logits.cols(); ++c) d_bias(0, c) += d_logits(t, c);
  Matrix dx = matmul_nt(d_logits, model.readout);

  std::vector<BlockGradients> block_grads(model.blocks.size());
  for (std::size_t l = model.blocks.size(); l-- > 0;) {
    block_grads[l] = multi_head_backward(model.blocks[l], f.blocks[l], dx);
    dx += block_grads[l].q;
    dx += block_grads[l].k;
    dx += block_grads[l].v;
  }

  // Same order as flatten_parameters.
  std::size_t pos = 0;
  const std::size_t dm = model.token_embedding.cols();
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = dx.row(t);
    for (std::size_t c = 0; c < dm; ++c) grad[example.tokens[t] * dm + c] += row[c];
  }
  pos += model.token_embedding.size();
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = dx.row(t);
    for (std::size_t c = 0; c < dm; ++c) grad[pos + t * dm + c] += row[c];
  }
  pos += model.position_embedding.size();
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    const auto& g = block_grads[l];
    for (const auto& h : g.heads) {
      scatter(grad, h.w_q, pos);
      scatter(grad, h.w_k, pos);
      scatter(grad, h.w_v, pos);
    }
    scatter(grad, g.w_out, pos);
    const auto& shapes = model.blocks[l].shapes;
    for (std::size_t h = 0; h < shapes.size(); ++h)
      if (shapes[h].trainable()) grad[pos++] += g.raw_alpha[h];
  }
  scatter(grad, d_readout, pos);
  scatter(grad, d_bias, pos);
  return loss;
}

AttentionTensor attention_tensor(const ToyModel& model, const SequenceForward& forward,
                                 const std::vector<std::vector<std::size_t>>& clusters) {
  const std::size_t layers = forward.blocks.size();
  const std::size_t heads = model.blocks.front().num_heads();
  const std::size_t n = forward.embedded.rows();
  std::vector<double> entries;
  entries.reserve(layers * heads * n * n);
  std::vector<ShapeParam> shapes;
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t h = 0; h < heads; ++h) {
      const auto flat = forward.blocks[l].attention[h].weights.flat();
      entries.insert(entries.end(), flat.begin(), flat.end());
      shapes.push_back(model.blocks[l].shapes[h]);
    }
  }
  return AttentionTensor(AttentionKind::EncoderSelf, layers, heads, n, n, std::move(entries), std::move(shapes),
                         std::nullopt, clusters);
}

}  // namespace adasparse
