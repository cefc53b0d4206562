/*
 * Copyright 2026 The NAGO Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nago/app.hpp"
#include "nago/error.hpp"

namespace nago {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / ("nago_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(NAGO_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

TEST_F(CliTest, CardinalityDefaults) {
  const auto r = run("analyze cardinality");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("457702890423305960075472584481972000594976438654080000000"), std::string::npos);
  EXPECT_NE(r.out.find("4.58e56"), std::string::npos);
  EXPECT_NE(r.out.find("4.40e12"), std::string::npos);
}

TEST_F(CliTest, SampleIsReproducible) {
  const auto a = dir_ / "a.json", b = dir_ / "b.json";
  ASSERT_EQ(run("sample --seed 5 --out " + a.string()).code, kExitOk);
  ASSERT_EQ(run("sample --seed 5 --out " + b.string()).code, kExitOk);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto c = dir_ / "c.json";
  ASSERT_EQ(run("sample --seed 6 --out " + c.string()).code, kExitOk);
  EXPECT_NE(slurp(a), slurp(c));
  const auto cost = run("cost --json " + a.string());
  ASSERT_EQ(cost.code, kExitOk) << cost.err;
  EXPECT_EQ(nlohmann::json::parse(cost.out).at(0).at("cost").at("param_count").get<std::int64_t>() > 0, true);
  const auto dot = run("export dot --ir " + a.string());
  ASSERT_EQ(dot.code, kExitOk) << dot.err;
  EXPECT_EQ(dot.out.rfind("digraph", 0), 0u);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("").code, kExitUsage);
  EXPECT_EQ(run("frobnicate").code, kExitUsage);
  EXPECT_EQ(run("analyze cardinality --max banana").code, kExitUsage);
  EXPECT_EQ(run("--help").code, kExitOk);
  const auto missing = run("cost " + (dir_ / "missing.json").string());
  EXPECT_EQ(missing.code, kExitRuntime);
  EXPECT_EQ(missing.err.rfind("nago: ", 0), 0u);
  EXPECT_EQ(run("search bohb --evaluator magic --run-dir " + (dir_ / "r").string()).code, kExitRuntime);
}

TEST_F(CliTest, BohbRunAndReplay) {
  const auto first = dir_ / "first", second = dir_ / "second";
  const std::string args = "search bohb --space box --dim 3 --evaluator builtin:sphere-mf --iterations 4 --seed 2";
  ASSERT_EQ(run(args + " --run-dir " + first.string()).code, kExitOk);
  for (const char* f : {"config.json", "history.jsonl", "summary.json"}) EXPECT_TRUE(fs::exists(first / f)) << f;
  const auto replay = run("search bohb --config " + (first / "config.json").string() + " --run-dir " + second.string());
  ASSERT_EQ(replay.code, kExitOk) << replay.err;
  for (const char* f : {"config.json", "history.jsonl", "summary.json"}) EXPECT_EQ(slurp(first / f), slurp(second / f)) << f;
  // An explicit flag overrides the saved value.
  const auto third = dir_ / "third";
  ASSERT_EQ(run("search bohb --config " + (first / "config.json").string() + " --seed 3 --run-dir " + third.string()).code,
            kExitOk);
  EXPECT_EQ(nlohmann::json::parse(slurp(third / "config.json")).at("seed"), 3);
  EXPECT_NE(slurp(first / "history.jsonl"), slurp(third / "history.jsonl"));
  const auto hist = run("report history --in " + (first / "history.jsonl").string());
  ASSERT_EQ(hist.code, kExitOk);
  EXPECT_EQ(hist.out.rfind("id,config_id,bracket,rung,budget,status,objective,incumbent", 0), 0u);
}

TEST_F(CliTest, MoboSmoke) {
  const auto rd = dir_ / "mobo";
  const auto r = run("search mobo --space box --dim 2 --evaluator builtin:biobj-toy --objectives f1,f2 "
                     "--iterations 2 --batch 3 --candidates 200 --ref 1.1,1.1 --run-dir " + rd.string());
  ASSERT_EQ(r.code, kExitOk) << r.err;
  ASSERT_TRUE(fs::exists(rd / "archive.jsonl"));
  EXPECT_FALSE(slurp(rd / "archive.jsonl").empty());
  const auto pareto = run("report pareto --in " + (rd / "archive.jsonl").string() + " --objectives f1,f2 --ref 1.1,1.1");
  ASSERT_EQ(pareto.code, kExitOk) << pareto.err;
  EXPECT_EQ(pareto.out.rfind("trial_id", 0), 0u);
}

TEST_F(CliTest, ProxyMoboWritesRunDirectory) {
  const auto r = run("search mobo --evaluator proxy --iterations 1 --batch 2 --candidates 100 --threads 1 --out " +
                     dir_.string());
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const fs::path path(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(path.parent_path(), dir_);
  EXPECT_EQ(path.filename().string().rfind("mobo-", 0), 0u);
  EXPECT_TRUE(fs::exists(path / "archive.jsonl"));
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.command = "mobo";
  c.space = "rnag";
  c.dataset = "flowers102";
  c.objectives = {"error", "memory"};
  c.seed = 123;
  c.reference = {1.0, 500.0};
  c.surrogate.sampling_steps = 300;
  const RunConfig r = c.resolved();
  EXPECT_EQ(r.param_budget, 6'000'000);
  EXPECT_EQ(r.iterations, 30);
  EXPECT_EQ(r.objectives, (std::vector<std::string>{kValError, kMemoryMb}));
  const RunConfig back = run_config_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(to_json(back), to_json(r));
  EXPECT_EQ(default_param_budget("cifar10"), 4'000'000);
  EXPECT_EQ(dataset_resolution("imagenet"), 224);
  EXPECT_EQ(dataset_resolution("cifar100"), 32);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.space = "cube";
  EXPECT_ANY_THROW(c.resolved());
  RunConfig d;
  d.eta = 1.0;
  EXPECT_ANY_THROW(d.resolved());
}

}  // namespace
}  // namespace nago
