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
// fd_gradient check of multi_head_backward over every parameter and input of
// a small random block, shared by the unit tests and the acceptance
// runner.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "adasparse/attention.hpp"
#include "adasparse/core/rng.hpp"
#include "adasparse/gradients.hpp"

namespace blockcheck {

using namespace adasparse;

struct Result {
  double max_rel_error = 0.0;  // worst over parameter groups
  std::size_t parameters = 0;
  std::size_t redraws = 0;
};

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

inline std::vector<std::vector<bool>> supports(const BlockForward& f) {
  std::vector<std::vector<bool>> out;
  for (const auto& a : f.attention) {
    std::vector<bool> s;
    for (double v : a.weights.flat()) s.push_back(v > 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

// Relative error per parameter group: max |a − f| / max(max |f|, 1e-7).
inline Result check(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t dm, std::size_t dh,
                    std::size_t heads, bool causal = false, double step = 1e-6) {
  Rng rng(seed);
  Result result;
  for (;;) {
    MultiHeadBlock block = MultiHeadBlock::random(heads, dm, dh, causal ? AttentionKind::DecoderSelf : AttentionKind::EncoderSelf,
                                                  ShapePolicy::Adaptive, rng);
    Matrix q = random_matrix(rng, n, dm), k = random_matrix(rng, m, dm), v = random_matrix(rng, m, dm);
    const Matrix u = random_matrix(rng, n, dm);
    const std::optional<MaskMatrix> mask = causal ? std::optional<MaskMatrix>(causal_mask(n)) : std::nullopt;
    const BlockForward fwd = multi_head_forward(block, q, k, v, mask);
    const BlockGradients grads = multi_head_backward(block, fwd, u);
    const auto base = supports(fwd);

    struct Group {
      const char* name;
      std::vector<double*> params;
      std::vector<double> analytic;
    };
    std::vector<Group> groups;
    auto add = [&](const char* name, Matrix& p, const Matrix& g) {
      Group grp{name, {}, {}};
      for (std::size_t i = 0; i < p.size(); ++i) {
        grp.params.push_back(&p.flat()[i]);
        grp.analytic.push_back(g.flat()[i]);
      }
      groups.push_back(std::move(grp));
    };
    for (std::size_t h = 0; h < heads; ++h) {
      add("w_q", block.heads[h].w_q, grads.heads[h].w_q);
      add("w_k", block.heads[h].w_k, grads.heads[h].w_k);
      add("w_v", block.heads[h].w_v, grads.heads[h].w_v);
    }
    add("w_out", block.w_out, grads.w_out);
    add("q", q, grads.q);
    add("k", k, grads.k);
    add("v", v, grads.v);
    std::vector<double> raws(heads);
    for (std::size_t h = 0; h < heads; ++h) raws[h] = block.shapes[h].raw();
    Group raw_group{"raw_alpha", {}, grads.raw_alpha};
    for (std::size_t h = 0; h < heads; ++h) raw_group.params.push_back(&raws[h]);
    groups.push_back(std::move(raw_group));

    std::vector<double*> slots;
    for (const auto& g : groups) slots.insert(slots.end(), g.params.begin(), g.params.end());
    std::vector<double> x0;
    for (double* p : slots) x0.push_back(*p);

    bool stable = true;
    const VectorFunction objective = [&](std::span<const double> x) {
      for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = x[i];
      for (std::size_t h = 0; h < heads; ++h) block.shapes[h] = ShapeParam::from_raw(raws[h]);
      const BlockForward f = multi_head_forward(block, q, k, v, mask);
      if (supports(f) != base) stable = false;
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += u.flat()[i] * f.output.flat()[i];
      return std::vector<double>{s};
    };
    const Matrix fd = fd_gradient(objective, x0, step);
    for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = x0[i];

    double worst = 0;
    std::size_t col = 0;
    for (const auto& g : groups) {
      double diff = 0, scale = 0;
      for (std::size_t i = 0; i < g.params.size(); ++i, ++col) {
        diff = std::max(diff, std::abs(fd(0, col) - g.analytic[i]));
        scale = std::max(scale, std::abs(fd(0, col)));
      }
      worst = std::max(worst, diff / std::max(scale, 1e-7));
    }
    const std::size_t count = col;
    if (!stable) {
      ++result.redraws;
      continue;
    }
    result.max_rel_error = worst;
    result.parameters = count;
    return result;
  }
}

}  // namespace blockcheck
