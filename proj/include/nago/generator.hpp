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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "nago/architecture.hpp"
#include "nago/cost_model.hpp"
#include "nago/random_graph.hpp"

namespace nago {

// Full hierarchical generator vector: three graph levels plus stage ratios,
// channel ratios, merge-strategy weights (weighted_sum, attention, concat)
// and operation weights (conv1x1, conv3x3, conv5x5, pool3x3, pool5x5).
struct GeneratorHyperparams {
  WsParams top{3, 2, 0.5};
  ErParams mid{1, 0.5};
  WsParams bottom{3, 2, 0.5};
  std::vector<double> stage_ratio{0.33, 0.33, 0.33};
  std::vector<double> channel_ratio{1.0, 2.0, 4.0};
  std::array<double, 3> merge_weights{1.0, 0.0, 0.0};
  std::array<double, 5> op_weights{0.0, 1.0, 0.0, 0.0, 0.0};

  // Structural checks (graph parameters, positive ratios, normalized weights).
  void validate() const;
  // Additionally enforce the HNAG search ranges.
  void validate_search_ranges() const;

  bool operator==(const GeneratorHyperparams&) const = default;
};

// Flat randomly-wired baseline: one WS graph per stage, chained.
struct RnagHyperparams {
  std::array<WsParams, 3> stages{WsParams{32, 4, 0.75}, WsParams{32, 4, 0.75}, WsParams{32, 4, 0.75}};
  std::vector<double> channel_ratio{1.0, 2.0, 4.0};

  void validate() const;
  void validate_search_ranges() const;

  bool operator==(const RnagHyperparams&) const = default;
};

// Theta documents are flat JSON objects: N_t, K_t, P_t, N_m, P_m, N_b, K_b,
// P_b, and optional theta_S, theta_C, theta_M, theta_op arrays (defaults as
// above). RNAG uses N_1..N_3, K_1..K_3, P_1..P_3 and optional theta_C.
nlohmann::json to_json(const GeneratorHyperparams& theta);
nlohmann::json to_json(const RnagHyperparams& theta);
GeneratorHyperparams hnag_theta_from_json(const nlohmann::json& doc);
RnagHyperparams rnag_theta_from_json(const nlohmann::json& doc);

struct StagePlan {
  std::vector<int> nodes_per_stage;
  std::vector<int> channels_per_stage;
};

// Largest-remainder apportionment of top_node_count over the stage ratios.
// Every stage receives at least one node; ties in the remainders go to the
// earlier stage. Throws InfeasibleSplitError if there are fewer nodes than
// stages.
std::vector<int> split_stages(int top_node_count, std::span<const double> stage_ratio);

struct NodeAssignment {
  MergeStrategy merge = MergeStrategy::WeightedSum;
  OpKind op = OpKind::Conv3x3;

  bool operator==(const NodeAssignment&) const = default;
};

// Independent categorical draws per node. Weights must be nonnegative and sum
// to one within 1e-6.
std::vector<NodeAssignment> sample_merge_and_ops(int node_count, std::span<const double> merge_weights,
                                                 std::span<const double> op_weights, std::uint64_t seed);

struct SampleOptions {
  int input_channels = 3;
  CostOptions cost;
};

// Samples the three-level hierarchy and flattens it. Sub-graphs draw from
// streams keyed by their position in the hierarchy, so changing one level's
// hyperparameters leaves the other levels' draws untouched. Channels are
// solved against param_budget; throws BudgetError if it is infeasible.
ArchitectureIR sample_hnag(const GeneratorHyperparams& theta, std::uint64_t seed, std::int64_t param_budget,
                           const SampleOptions& options = {});

// Topology only (channels left at one per stage); used by the channel solver
// tests and by analyses that price several budgets.
ArchitectureIR build_hnag_topology(const GeneratorHyperparams& theta, std::uint64_t seed,
                                   const SampleOptions& options = {});

ArchitectureIR sample_rnag(const RnagHyperparams& theta, std::uint64_t seed, std::int64_t param_budget,
                           const SampleOptions& options = {});
ArchitectureIR build_rnag_topology(const RnagHyperparams& theta, std::uint64_t seed,
                                   const SampleOptions& options = {});

}  // namespace nago
