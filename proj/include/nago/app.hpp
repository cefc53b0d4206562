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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nago/bnn_surrogate.hpp"
#include "nago/bohb.hpp"
#include "nago/eval_bridge.hpp"
#include "nago/search_domain.hpp"

namespace nago {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Everything a search run depends on. Written to config.json in the run
// directory; loading it back and running again reproduces the history.
struct RunConfig {
  std::string command = "bohb";  // "bohb" or "mobo"
  std::string space = "hnag";    // "hnag", "rnag" or "box"
  std::string blocks = "graph";  // hnag search blocks, see parse_search_blocks
  int dimension = 8;             // box dimension
  std::string dataset = "cifar10";
  std::int64_t param_budget = 0;  // 0 picks the dataset default
  std::string evaluator = "proxy";
  std::vector<std::string> objectives;  // empty picks the command default
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  int threads = 0;
  double max_budget = 0.0;  // 0 uses the largest schedule budget

  // bohb
  std::vector<double> budgets{30.0, 60.0, 120.0};
  double eta = 2.0;
  int iterations = 0;  // 0 picks the command default (60 bohb, 30 mobo)
  KdeConfig kde;

  // mobo
  int batch = 8;
  int candidates = 2000;
  double budget = 60.0;
  std::string init;  // history.jsonl to warm start from
  std::vector<double> reference;
  SghmcConfig surrogate;

  // Defaults resolved, names canonical, ranges checked.
  RunConfig resolved() const;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);

std::int64_t default_param_budget(const std::string& dataset);
int dataset_resolution(const std::string& dataset);

SearchProblem make_problem(const RunConfig& config);

// Runs the configured search and writes config.json, history.jsonl,
// summary.json (and archive.jsonl for mobo) into run_dir.
void execute_run(const RunConfig& config, const std::filesystem::path& run_dir);

// <output_dir>/<command>-<UTC timestamp>-s<seed>, suffixed when taken.
std::filesystem::path make_run_dir(const RunConfig& config);

int run_cli(int argc, char** argv);

}  // namespace nago
