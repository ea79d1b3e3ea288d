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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "json.hpp"

#include "doctest.h"

#include "adasparse/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "adasparse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = adasparse::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("adasparse_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("transform prints probabilities and threshold") {
  const fs::path dir = scratch("transform");
  write(dir / "vec.json", "[1.0, 0.5, -1.0]");
  const Outcome o = run({"transform", "--alpha", "2", "--input", (dir / "vec.json").string()});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["probs"][0].get<double>() == doctest::Approx(0.75));
  CHECK(j["probs"][1].get<double>() == doctest::Approx(0.25));
  CHECK(j["probs"][2].get<double>() == 0.0);
  CHECK(j["tau"].get<double>() == doctest::Approx(0.25));

  write(dir / "batch.json", "[[0, 0], [3, 0]]");
  const Outcome b = run({"transform", "--alpha", "1", "--input", (dir / "batch.json").string()});
  REQUIRE(b.code == 0);
  const json jb = json::parse(b.out);
  REQUIRE(jb.size() == 2);
  CHECK(jb[0]["probs"][0].get<double>() == 0.5);

  write(dir / "bad.json", "[1.0, \"x\"]");
  CHECK(run({"transform", "--alpha", "1.5", "--input", (dir / "bad.json").string()}).code != 0);
  CHECK(run({"transform", "--alpha", "0.5", "--input", (dir / "vec.json").string()}).code != 0);
  fs::remove_all(dir);
}

TEST_CASE("gradcheck passes and reports JSON") {
  const Outcome o = run({"gradcheck", "--alpha", "1.3", "--dim", "8", "--trials", "100", "--seed", "7"});
  CHECK(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["pass"].get<bool>());
  CHECK(j["trials"].size() == 100);
  CHECK(o.err.rfind("PASS", 0) == 0);
}

TEST_CASE("usage errors exit with code 2 and name the offender") {
  const Outcome unknown = run({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("frobnicate") != std::string::npos);
  const Outcome flag = run({"gradcheck", "--alpha", "1.5", "--dim", "4", "--bogus"});
  CHECK(flag.code == 2);
  CHECK(flag.err.find("--bogus") != std::string::npos);
  const Outcome missing = run({"gradcheck", "--dim", "4"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--alpha") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--out", "/tmp/x", "--set", "colour=red"}).code == 2);
}

TEST_CASE("train then analyze round trip") {
  const fs::path dir = scratch("train");
  write(dir / "run.cfg",
        "task = prev-token\nvocab_size = 6\nseq_len = 5\nn_train = 16\nn_eval = 3\n"
        "layers = 1\nheads = 2\nmodel_dim = 4\nhead_dim = 2\nsteps = 5\nlog_every = 5\n");
  const Outcome t = run({"train", "--config", (dir / "run.cfg").string(), "--out", (dir / "run").string(),
                         "--set", "seed=4"});
  REQUIRE(t.code == 0);
  CHECK(json::parse(t.out).contains("eval_loss"));
  CHECK(fs::exists(dir / "run" / "report.json"));
  CHECK(fs::exists(dir / "run" / "alpha_trajectory.csv"));

  const Outcome a = run({"analyze", "--tensors", (dir / "run" / "tensors").string(), "--out",
                         (dir / "analysis" / "report.json").string(), "--csv", (dir / "csv").string()});
  REQUIRE(a.code == 0);
  std::ifstream saved(dir / "run" / "report.json");
  std::ifstream fresh(dir / "analysis" / "report.json");
  CHECK(json::parse(saved) == json::parse(fresh));
  CHECK(json::parse(a.out)["sequences"].get<int>() == 3);
  CHECK(fs::exists(dir / "csv" / "density.csv"));
  CHECK(fs::exists(dir / "csv" / "positional_confidence.csv"));

  CHECK(run({"analyze", "--tensors", (dir / "missing").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("installed binary dispatches") {
  const char* bin = std::getenv("ADASPARSE_CLI");
  if (bin == nullptr) return;
  const std::string cmd = std::string(bin) + " gradcheck --alpha 1.5 --dim 4 --trials 5 --seed 1 >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  const std::string bad = std::string(bin) + " nonsense >/dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
