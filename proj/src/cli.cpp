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

#include "adasparse/cli.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adasparse/analysis.hpp"
#include "adasparse/core/error.hpp"
#include "adasparse/gradcheck.hpp"
#include "adasparse/harness/train.hpp"
#include "adasparse/serialization.hpp"
#include "adasparse/transforms.hpp"

namespace adasparse {
namespace {

struct TransformArgs {
  double alpha = 1.5;
  std::string input;
  double tol = kDefaultBisectionTol;
};

struct TrainArgs {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

struct AnalyzeArgs {
  std::string tensors;
  std::string out;
  std::string csv;
  double eps = 0.0;
};

int run_transform(const TransformArgs& a, std::ostream& out) {
  const json input = read_json_file(a.input);
  const ShapeParam shape = ShapeParam::fixed(a.alpha);
  if (input.is_array() && !input.empty() && !input.front().is_number()) {
    json batch = json::array();
    for (const auto& row : input) batch.push_back(to_json(entmax(score_vector_from_json(row), shape, a.tol)));
    out << batch.dump() << '\n';
  } else {
    out << to_json(entmax(score_vector_from_json(input), shape, a.tol)).dump() << '\n';
  }
  return 0;
}

int run_gradcheck_cmd(const GradcheckOptions& o, std::ostream& out, std::ostream& err) {
  const GradcheckReport report = run_gradcheck(o);
  out << report.to_json().dump() << '\n';
  err << (report.pass ? "PASS" : "FAIL") << ": " << report.trials.size()
      << " trials, max score rel error " << report.max_score_error << ", max alpha rel error "
      << report.max_alpha_error << '\n';
  return report.pass ? 0 : 1;
}

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig config = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.task.validate();
  config.train.validate();
  const TrainResult result = train(config.train, config.task, &err);
  write_run(config, result, a.out);
  out << run_summary(result).dump() << '\n';
  return 0;
}

int run_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const std::vector<AttentionTensor> tensors = load_tensors(a.tensors);
  if (tensors.empty()) throw Error(ErrorCode::Io, "no tensor files in " + a.tensors);
  AnalysisOptions options;
  options.eps = a.eps;
  const MetricReport report = analyze(tensors, options);
  const json j = report.to_json();
  if (!a.out.empty()) {
    const std::filesystem::path path(a.out);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_json_file(path, j);
  }
  if (!a.csv.empty()) write_metric_csvs(report, a.csv);
  out << j.dump() << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse attention with learned entmax shapes", "adasparse"};
  app.require_subcommand(1);

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "Map a score vector onto the simplex");
  transform->add_option("--alpha", ta.alpha, "Shape parameter (>= 1)")->required();
  transform->add_option("--input", ta.input, "JSON file: score array or {scores, mask}")->required();
  transform->add_option("--tol", ta.tol, "Bisection tolerance");

  GradcheckOptions go;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and numerical Jacobians");
  gradcheck->add_option("--alpha", go.alpha, "Shape parameter (> 1)")->required();
  gradcheck->add_option("--dim", go.dim, "Vector length")->required();
  gradcheck->add_option("--trials", go.trials, "Number of random draws");
  gradcheck->add_option("--seed", go.seed, "Random seed");

  TrainArgs tra;
  auto* train_cmd = app.add_subcommand("train", "Train the toy model and write a run directory");
  train_cmd->add_option("--config", tra.config, "key = value config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tra.out, "Run directory")->required();
  train_cmd->add_option("--set", tra.overrides, "Override one config key (key=value)");

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute attention metrics from tensor dumps");
  analyze_cmd->add_option("--tensors", aa.tensors, "Directory of tensor JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  analyze_cmd->add_option("--out", aa.out, "Path of the report JSON file");
  analyze_cmd->add_option("--csv", aa.csv, "Directory for one CSV per metric");
  analyze_cmd->add_option("--eps", aa.eps, "Density threshold");

  if (argc > 1) {
    const std::string first = argv[1];
    if (!first.empty() && first.front() != '-' && first != "transform" && first != "gradcheck" &&
        first != "train" && first != "analyze") {
      err << "usage error: unknown subcommand '" << first << "'\n";
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (transform->parsed()) return run_transform(ta, out);
    if (gradcheck->parsed()) return run_gradcheck_cmd(go, out, err);
    if (train_cmd->parsed()) return run_train(tra, out, err);
    if (analyze_cmd->parsed()) return run_analyze(aa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace adasparse
