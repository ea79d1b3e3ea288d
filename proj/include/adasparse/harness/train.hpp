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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adasparse/analysis.hpp"
#include "adasparse/harness/dataset.hpp"
#include "adasparse/harness/model.hpp"

namespace adasparse {

struct TrainConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 32;
  std::size_t head_dim = 8;
  PiMode pi_mode = PiMode::Adaptive;
  double learning_rate = 0.05;
  double momentum = 0.9;
  /// Global gradient-norm ceiling applied before the momentum update;
  /// 0 disables clipping.
  double clip_norm = 1.0;
  std::size_t steps = 1500;
  std::size_t batch_size = 8;
  std::size_t log_every = 50;
  std::uint64_t seed = 1;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

/// Task and training settings read from one flat `key = value` file.
/// Blank lines and lines starting with '#' are ignored.
struct RunConfig {
  ToyTaskSpec task;
  TrainConfig train;

  /// Throws Error(InvalidConfig) on unknown keys or malformed values.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  /// Applies one `key = value` assignment.
  void set(const std::string& key, const std::string& value);
  /// Every key in a fixed order, parseable by `parse`.
  std::string snapshot() const;
};

struct TrainResult {
  ToyModel model;
  MetricReport report;
  AlphaTrajectory trajectory;
  std::vector<AttentionTensor> eval_tensors;
  std::vector<double> loss_history;     // mean batch loss per step
  std::vector<double> max_raw_change;   // per step, max |Δ raw α| over heads
  double initial_eval_loss = 0.0;
  double eval_loss = 0.0;
  double eval_accuracy = 0.0;
  double tokens_per_second = 0.0;       // wall clock, informational only
};

/// SGD with momentum on token-level cross-entropy. α values are logged at
/// steps 0, log_every, 2·log_every, … and once more after the last step.
/// Progress goes to `log` when non-null.
/// Throws Error(DivergedLoss) if a batch loss or a parameter becomes
/// non-finite.
TrainResult train(const TrainConfig& config, const ToyTaskSpec& spec, std::ostream* log = nullptr);

/// Writes config.snapshot, alpha_trajectory.csv, loss.csv, report.json,
/// model.json and tensors/seq_NNNN.json under `out_dir`.
void write_run(const RunConfig& config, const TrainResult& result, const std::filesystem::path& out_dir);

/// Small JSON summary printed by the CLI.
nlohmann::json run_summary(const TrainResult& result);

}  // namespace adasparse
