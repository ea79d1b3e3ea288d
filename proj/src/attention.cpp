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

#include "adasparse/attention.hpp"

#include <cmath>
#include <string>

#include "adasparse/gradients.hpp"
#include "adasparse/transforms.hpp"

namespace adasparse {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

bool all_finite(const Matrix& m) {
  for (double v : m.flat())
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

void MultiHeadBlock::validate() const {
  require(!heads.empty(), "block needs at least one head");
  require(shapes.size() == heads.size(), "one shape parameter per head");
  const std::size_t dm = model_dim();
  const std::size_t dh = head_dim();
  require(dm > 0 && dh > 0, "empty projection");
  for (const auto& h : heads) {
    for (const Matrix* w : {&h.w_q, &h.w_k, &h.w_v}) {
      require(w->rows() == dm && w->cols() == dh, "projection shapes differ across heads");
      require(all_finite(*w), "non-finite projection weight");
    }
  }
  require(w_out.rows() == heads.size() * dh && w_out.cols() == dm, "w_out has the wrong shape");
  require(all_finite(w_out), "non-finite output weight");
}

MultiHeadBlock MultiHeadBlock::random(std::size_t num_heads, std::size_t model_dim,
                                      std::size_t head_dim, AttentionKind kind,
                                      ShapePolicy policy, Rng& rng) {
  MultiHeadBlock block;
  block.kind = kind;
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(model_dim));
  for (std::size_t h = 0; h < num_heads; ++h) {
    HeadProjection p;
    p.w_q = uniform_matrix(model_dim, head_dim, in_bound, rng);
    p.w_k = uniform_matrix(model_dim, head_dim, in_bound, rng);
    p.w_v = uniform_matrix(model_dim, head_dim, in_bound, rng);
    block.heads.push_back(std::move(p));
  }
  const double out_bound = 1.0 / std::sqrt(static_cast<double>(num_heads * head_dim));
  block.w_out = uniform_matrix(num_heads * head_dim, model_dim, out_bound, rng);
  for (std::size_t h = 0; h < num_heads; ++h) {
    switch (policy) {
      case ShapePolicy::Softmax: block.shapes.push_back(ShapeParam::fixed(1.0)); break;
      case ShapePolicy::Entmax15: block.shapes.push_back(ShapeParam::fixed(1.5)); break;
      case ShapePolicy::Adaptive: block.shapes.push_back(ShapeParam::from_raw(rng.uniform(-1.0, 1.0))); break;
    }
  }
  return block;
}

AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                                     const ShapeParam& shape, const std::optional<MaskMatrix>& mask) {
  require(q.cols() == k.cols(), "queries and keys differ in width");
  require(k.rows() == v.rows(), "keys and values differ in count");
  require(q.rows() > 0 && k.rows() > 0, "empty attention operands");
  if (mask) {
    require(mask->rows() == q.rows() && mask->cols() == k.rows(), "mask shape mismatch");
    for (std::size_t r = 0; r < mask->rows(); ++r)
      if (mask->unmasked_in_row(r) == 0)
        throw Error(ErrorCode::AllMaskedRow, "query row " + std::to_string(r) + " has no visible key");
  }

  Matrix scores = matmul_nt(q, k);
  scores *= 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const auto rows = entmax_rows(scores, shape, mask ? &*mask : nullptr);

  Matrix weights(q.rows(), k.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto p = rows[r].point.probs();
    std::copy(p.begin(), p.end(), weights.row(r).begin());
  }
  Matrix out = matmul(weights, v);
  return {std::move(out), HeadAttention{std::move(weights), shape}};
}

BlockForward multi_head_forward(const MultiHeadBlock& block, const Matrix& q, const Matrix& k,
                                const Matrix& v, const std::optional<MaskMatrix>& mask) {
  block.validate();
  const std::size_t dm = block.model_dim();
  const std::size_t dh = block.head_dim();
  require(q.cols() == dm && k.cols() == dm && v.cols() == dm, "inputs must have model_dim columns");

  BlockForward f;
  f.q_in = q;
  f.k_in = k;
  f.v_in = v;
  f.mask = mask;
  f.concat = Matrix(q.rows(), block.num_heads() * dh);
  for (std::size_t h = 0; h < block.num_heads(); ++h) {
    const HeadProjection& proj = block.heads[h];
    f.q_proj.push_back(matmul(q, proj.w_q));
    f.k_proj.push_back(matmul(k, proj.w_k));
    f.v_proj.push_back(matmul(v, proj.w_v));
    AttentionOutput head =
        scaled_dot_attention(f.q_proj.back(), f.k_proj.back(), f.v_proj.back(), block.shapes[h], mask);
    add_column_block(f.concat, head.output, h * dh);
    f.attention.push_back(std::move(head.attention));
  }
  f.output = matmul(f.concat, block.w_out);
  return f;
}

BlockGradients multi_head_backward(const MultiHeadBlock& block, const BlockForward& forward,
                                   const Matrix& upstream) {
  require(upstream.rows() == forward.output.rows() && upstream.cols() == forward.output.cols(),
          "upstream gradient shape differs from the block output");
  const std::size_t dh = block.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  BlockGradients g;
  g.w_out = matmul_tn(forward.concat, upstream);
  const Matrix d_concat = matmul_nt(upstream, block.w_out);
  g.q = Matrix(forward.q_in.rows(), forward.q_in.cols());
  g.k = Matrix(forward.k_in.rows(), forward.k_in.cols());
  g.v = Matrix(forward.v_in.rows(), forward.v_in.cols());
  g.raw_alpha.assign(block.num_heads(), 0.0);

  for (std::size_t h = 0; h < block.num_heads(); ++h) {
    const Matrix& weights = forward.attention[h].weights;
    const ShapeParam& shape = block.shapes[h];
    const Matrix d_head = column_block(d_concat, h * dh, dh);

    const Matrix d_weights = matmul_nt(d_head, forward.v_proj[h]);  // n × m
    const Matrix d_vproj = matmul_tn(weights, d_head);              // m × dh

    Matrix d_scores(weights.rows(), weights.cols());
    double d_raw = 0.0;
    for (std::size_t r = 0; r < weights.rows(); ++r) {
      const auto row = weights.row(r);
      const EntmaxBackwardContext ctx(SimplexPoint::from_probs({row.begin(), row.end()}),
                                      shape.alpha());
      const auto upstream_row = d_weights.row(r);
      const auto ds = vjp_scores(ctx, upstream_row);
      std::copy(ds.begin(), ds.end(), d_scores.row(r).begin());
      if (shape.trainable()) d_raw += grad_raw_alpha(ctx, upstream_row, shape);
    }
    g.raw_alpha[h] = d_raw;
    d_scores *= inv_sqrt;

    const Matrix d_qproj = matmul(d_scores, forward.k_proj[h]);     // n × dh
    const Matrix d_kproj = matmul_tn(d_scores, forward.q_proj[h]);  // m × dh

    const HeadProjection& proj = block.heads[h];
    HeadProjection grad;
    grad.w_q = matmul_tn(forward.q_in, d_qproj);
    grad.w_k = matmul_tn(forward.k_in, d_kproj);
    grad.w_v = matmul_tn(forward.v_in, d_vproj);
    g.heads.push_back(std::move(grad));

    g.q += matmul_nt(d_qproj, proj.w_q);
    g.k += matmul_nt(d_kproj, proj.w_k);
    g.v += matmul_nt(d_vproj, proj.w_v);
  }
  return g;
}

MaskMatrix causal_mask(std::size_t n) {
  MaskMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, true);
  return m;
}

}  // namespace adasparse
