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

#include "adasparse/harness/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "adasparse/core/rng.hpp"
#include "adasparse/serialization.hpp"

namespace adasparse {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size() || x < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs a non-negative integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs an unsigned integer, got '" + v + "'");
  }
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' needs a real number, got '" + v + "'");
  }
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ModelShape model_shape(const TrainConfig& c, const ToyTaskSpec& spec) {
  return ModelShape{spec.vocab_size, spec.seq_len, c.layers, c.heads, c.model_dim, c.head_dim};
}

void log_alphas(AlphaTrajectory& trajectory, long step, const ToyModel& model) {
  for (std::size_t l = 0; l < model.blocks.size(); ++l)
    trajectory.log(step, model.blocks[l].kind, l, model.blocks[l].shapes);
}

struct EvalOutcome {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalOutcome evaluate(const ToyModel& model, const std::vector<Example>& examples,
                     std::vector<AttentionTensor>* tensors) {
  EvalOutcome out;
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& ex : examples) {
    const SequenceForward f = forward_sequence(model, ex.tokens);
    out.loss += cross_entropy(f.logits, ex.targets);
    for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
      const auto row = f.logits.row(t);
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += best == ex.targets[t] ? 1 : 0;
      ++total;
    }
    if (tensors != nullptr) tensors->push_back(attention_tensor(model, f, ex.clusters));
  }
  if (!examples.empty()) {
    out.loss /= static_cast<double>(examples.size());
    out.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (layers == 0 || heads == 0 || model_dim == 0 || head_dim == 0)
    throw Error(ErrorCode::InvalidConfig, "model dimensions must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidConfig, "momentum must lie in [0, 1)");
  if (!(clip_norm >= 0.0)) throw Error(ErrorCode::InvalidConfig, "clip_norm must be non-negative");
  if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch_size must be positive");
  if (log_every == 0) throw Error(ErrorCode::InvalidConfig, "log_every must be positive");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "task") task.task = toy_task_from_string(value);
  else if (key == "vocab_size") task.vocab_size = parse_size(key, value);
  else if (key == "seq_len") task.seq_len = parse_size(key, value);
  else if (key == "n_train") task.n_train = parse_size(key, value);
  else if (key == "n_eval") task.n_eval = parse_size(key, value);
  else if (key == "data_seed") task.seed = parse_u64(key, value);
  else if (key == "max_cluster_size") task.max_cluster_size = parse_size(key, value);
  else if (key == "layers") train.layers = parse_size(key, value);
  else if (key == "heads") train.heads = parse_size(key, value);
  else if (key == "model_dim") train.model_dim = parse_size(key, value);
  else if (key == "head_dim") train.head_dim = parse_size(key, value);
  else if (key == "pi_mode") train.pi_mode = pi_mode_from_string(value);
  else if (key == "learning_rate") train.learning_rate = parse_real(key, value);
  else if (key == "momentum") train.momentum = parse_real(key, value);
  else if (key == "clip_norm") train.clip_norm = parse_real(key, value);
  else if (key == "steps") train.steps = parse_size(key, value);
  else if (key == "batch_size") train.batch_size = parse_size(key, value);
  else if (key == "log_every") train.log_every = parse_size(key, value);
  else if (key == "seed") train.seed = parse_u64(key, value);
  else throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    config.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  config.task.validate();
  config.train.validate();
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string RunConfig::snapshot() const {
  std::ostringstream out;
  out << "task = " << to_string(task.task) << '\n'
      << "vocab_size = " << task.vocab_size << '\n'
      << "seq_len = " << task.seq_len << '\n'
      << "n_train = " << task.n_train << '\n'
      << "n_eval = " << task.n_eval << '\n'
      << "data_seed = " << task.seed << '\n'
      << "max_cluster_size = " << task.max_cluster_size << '\n'
      << "layers = " << train.layers << '\n'
      << "heads = " << train.heads << '\n'
      << "model_dim = " << train.model_dim << '\n'
      << "head_dim = " << train.head_dim << '\n'
      << "pi_mode = " << to_string(train.pi_mode) << '\n'
      << "learning_rate = " << format_real(train.learning_rate) << '\n'
      << "momentum = " << format_real(train.momentum) << '\n'
      << "clip_norm = " << format_real(train.clip_norm) << '\n'
      << "steps = " << train.steps << '\n'
      << "batch_size = " << train.batch_size << '\n'
      << "log_every = " << train.log_every << '\n'
      << "seed = " << train.seed << '\n';
  return out.str();
}

TrainResult train(const TrainConfig& config, const ToyTaskSpec& spec, std::ostream* log) {
  config.validate();
  spec.validate();
  if (spec.n_train == 0 && config.steps > 0) throw Error(ErrorCode::InvalidConfig, "no training data");
  const ToyDataset data = generate_dataset(spec);

  TrainResult result;
  result.model = ToyModel::random(model_shape(config, spec), config.pi_mode, config.seed);
  ToyModel& model = result.model;
  std::vector<double> params = flatten_parameters(model);
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> grad(params.size(), 0.0);

  // Positions of trainable raw α values inside the flat parameter vector.
  std::vector<std::size_t> raw_slots;
  {
    std::size_t pos = model.token_embedding.size() + model.position_embedding.size();
    for (const auto& block : model.blocks) {
      for (const auto& h : block.heads) pos += h.w_q.size() + h.w_k.size() + h.w_v.size();
      pos += block.w_out.size();
      for (const auto& s : block.shapes)
        if (s.trainable()) raw_slots.push_back(pos++);
    }
  }

  result.initial_eval_loss = evaluate(model, data.eval, nullptr).loss;

  Rng order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();

  const auto start = std::chrono::steady_clock::now();
  std::size_t tokens_seen = 0;
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (step % config.log_every == 0) log_alphas(result.trajectory, static_cast<long>(step), model);

    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_loss = 0.0;
    const double scale = 1.0 / static_cast<double>(config.batch_size);
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        cursor = 0;
      }
      const Example& ex = data.train[order[cursor++]];
      try {
        batch_loss += scale * accumulate_gradient(model, ex, scale, grad);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidScores) throw;
        throw Error(ErrorCode::DivergedLoss, "scores became non-finite at step " + std::to_string(step));
      }
      tokens_seen += ex.tokens.size();
    }
    if (!std::isfinite(batch_loss))
      throw Error(ErrorCode::DivergedLoss, "loss is not finite at step " + std::to_string(step));
    result.loss_history.push_back(batch_loss);

    if (config.clip_norm > 0.0) {
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      norm = std::sqrt(norm);
      if (norm > config.clip_norm)
        for (double& g : grad) g *= config.clip_norm / norm;
    }

    double max_raw = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity[i] = config.momentum * velocity[i] + grad[i];
      params[i] -= config.learning_rate * velocity[i];
    }
    for (std::size_t slot : raw_slots) max_raw = std::max(max_raw, std::abs(config.learning_rate * velocity[slot]));
    result.max_raw_change.push_back(max_raw);
    assign_parameters(model, params);

    if (log != nullptr && (step + 1) % config.log_every == 0) {
      *log << "step " << step + 1 << " loss " << batch_loss << '\n';
    }
  }
  log_alphas(result.trajectory, static_cast<long>(config.steps), model);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.tokens_per_second = seconds > 0.0 ? static_cast<double>(tokens_seen) / seconds : 0.0;

  const EvalOutcome eval = evaluate(model, data.eval, &result.eval_tensors);
  result.eval_loss = eval.loss;
  result.eval_accuracy = eval.accuracy;
  if (!result.eval_tensors.empty()) result.report = analyze(result.eval_tensors);
  if (log != nullptr) {
    *log << "eval loss " << eval.loss << " accuracy " << eval.accuracy << " tokens/s "
         << result.tokens_per_second << '\n';
  }
  return result;
}

void write_run(const RunConfig& config, const TrainResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "tensors");
  const auto write_text = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
  };
  write_text(out_dir / "config.snapshot", config.snapshot());
  write_text(out_dir / "alpha_trajectory.csv", result.trajectory.to_csv());
  {
    std::ostringstream loss;
    loss << "step,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
      loss << i << ',' << format_real(result.loss_history[i]) << '\n';
    write_text(out_dir / "loss.csv", loss.str());
  }
  write_json_file(out_dir / "report.json", result.report.to_json());
  json blocks = json::array();
  for (const auto& b : result.model.blocks) blocks.push_back(to_json(b));
  write_json_file(out_dir / "model.json", json{{"token_embedding", to_json(result.model.token_embedding)},
                                               {"position_embedding", to_json(result.model.position_embedding)},
                                               {"blocks", std::move(blocks)},
                                               {"readout", to_json(result.model.readout)},
                                               {"readout_bias", to_json(result.model.readout_bias)}});
  for (std::size_t i = 0; i < result.eval_tensors.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seq_%04zu.json", i);
    write_json_file(out_dir / "tensors" / name, to_json(result.eval_tensors[i]), -1);
  }
}

nlohmann::json run_summary(const TrainResult& result) {
  return json{{"initial_eval_loss", result.initial_eval_loss},
              {"final_train_loss", result.loss_history.empty() ? json(nullptr) : json(result.loss_history.back())},
              {"eval_loss", result.eval_loss},
              {"eval_accuracy", result.eval_accuracy},
              {"report", result.report.to_json()}};
}

}  // namespace adasparse
