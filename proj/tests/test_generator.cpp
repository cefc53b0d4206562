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

#include <cmath>
#include <map>
#include <set>

#include "nago/random.hpp"
#include "nago/cost_model.hpp"
#include "nago/error.hpp"
#include "nago/generator.hpp"

namespace nago {
namespace {

GeneratorHyperparams theta_of(WsParams top, ErParams mid, WsParams bottom) {
  GeneratorHyperparams t;
  t.top = top;
  t.mid = mid;
  t.bottom = bottom;
  return t;
}

std::map<int, int> compute_nodes_per_stage(const ArchitectureIR& ir) {
  std::map<int, int> out;
  for (const auto& n : ir.nodes) {
    if (is_compute(n.op)) ++out[n.stage];
  }
  return out;
}

TEST(SplitStages, WorkedExample) {
  EXPECT_EQ(split_stages(20, std::vector<double>{0.2, 0.2, 0.6}), (std::vector<int>{4, 4, 12}));
}

TEST(SplitStages, SymmetricMinimum) {
  EXPECT_EQ(split_stages(3, std::vector<double>{0.33, 0.33, 0.33}), (std::vector<int>{1, 1, 1}));
}

TEST(SplitStages, RemainderTiesGoToEarlierStages) {
  EXPECT_EQ(split_stages(8, std::vector<double>{0.33, 0.33, 0.33}), (std::vector<int>{3, 3, 2}));
}

TEST(SplitStages, EveryStageGetsANode) {
  const auto split = split_stages(4, std::vector<double>{0.9, 0.05, 0.05});
  EXPECT_EQ(split, (std::vector<int>{2, 1, 1}));
}

TEST(SplitStages, SumsToNodeCount) {
  RandomStream rng(1);
  for (int t = 0; t < 500; ++t) {
    const int n = 3 + static_cast<int>(rng.below(30));
    std::vector<double> r{rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)};
    const auto split = split_stages(n, r);
    int total = 0;
    for (int s : split) {
      EXPECT_GE(s, 1);
      total += s;
    }
    EXPECT_EQ(total, n);
  }
}

TEST(SplitStages, TooFewNodes) {
  EXPECT_THROW(split_stages(2, std::vector<double>{0.3, 0.3, 0.4}), InfeasibleSplitError);
}

TEST(MergeAndOps, OneHotWeights) {
  const std::vector<double> merge{1, 0, 0};
  const std::vector<double> ops{0, 1, 0, 0, 0};
  for (const auto& a : sample_merge_and_ops(200, merge, ops, 3)) {
    EXPECT_EQ(a.op, OpKind::Conv3x3);
    EXPECT_EQ(a.merge, MergeStrategy::WeightedSum);
  }
}

TEST(MergeAndOps, UniformOpsFrequencies) {
  const std::vector<double> merge{1, 0, 0};
  const std::vector<double> ops(5, 0.2);
  const int n = 10000;
  std::map<OpKind, int> counts;
  for (const auto& a : sample_merge_and_ops(n, merge, ops, 21)) ++counts[a.op];
  ASSERT_EQ(counts.size(), 5u);
  const double sd = std::sqrt(n * 0.2 * 0.8);
  for (const auto& [op, c] : counts) EXPECT_NEAR(c, 2000.0, 3.0 * sd) << to_string(op);
}

TEST(MergeAndOps, RejectsUnnormalizedWeights) {
  const std::vector<double> merge{0.5, 0.2, 0.2};
  const std::vector<double> ops{0, 1, 0, 0, 0};
  EXPECT_THROW(sample_merge_and_ops(5, merge, ops, 0), ParameterError);
}

TEST(Hnag, BohbCifarGenerator) {
  const auto theta = theta_of({8, 5, 0.6}, {1, 0.7}, {5, 4, 0.2});
  const ArchitectureIR ir = sample_hnag(theta, 3, 4'000'000);
  validate(ir);
  EXPECT_EQ(ir.compute_node_count(), 40);
  const auto params = count_params(ir);
  EXPECT_LE(params, 4'000'000);
  EXPECT_GT(params, 3'600'000);
}

TEST(Hnag, RandomlyWiredDefaultShape) {
  const auto theta = theta_of({3, 2, 0.8}, {1, 1.0}, {32, 4, 0.75});
  const ArchitectureIR ir = build_hnag_topology(theta, 5);
  validate(ir);
  EXPECT_EQ(ir.stage_count, 3);
  EXPECT_EQ(compute_nodes_per_stage(ir), (std::map<int, int>{{0, 32}, {1, 32}, {2, 32}}));
}

TEST(Hnag, SingleMidNodeCollapses) {
  const auto theta = theta_of({6, 4, 0.5}, {1, 0.3}, {7, 4, 0.5});
  EXPECT_EQ(build_hnag_topology(theta, 1).compute_node_count(), 42);
}

TEST(Hnag, NodeCountIsProductOfLevels) {
  const auto theta = theta_of({4, 2, 0.5}, {3, 0.5}, {5, 2, 0.5});
  const auto ir = build_hnag_topology(theta, 2);
  EXPECT_EQ(ir.compute_node_count(), 60);
  std::set<std::array<int, 3>> origins;
  for (const auto& n : ir.nodes) {
    if (is_compute(n.op)) EXPECT_TRUE(origins.insert(n.origin).second);
  }
}

TEST(Hnag, Deterministic) {
  const auto theta = theta_of({5, 3, 0.5}, {2, 0.5}, {4, 2, 0.4});
  EXPECT_EQ(sample_hnag(theta, 11, 1'000'000), sample_hnag(theta, 11, 1'000'000));
  EXPECT_NE(sample_hnag(theta, 11, 1'000'000).edges, sample_hnag(theta, 12, 1'000'000).edges);
}

TEST(Hnag, OperationWeightsDoNotMoveTopology) {
  auto a = theta_of({6, 4, 0.5}, {3, 0.5}, {6, 4, 0.5});
  auto b = a;
  b.op_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  EXPECT_EQ(build_hnag_topology(a, 4).edges, build_hnag_topology(b, 4).edges);
}

TEST(Hnag, RandomDrawsAreValid) {
  RandomStream rng(2024);
  for (int t = 0; t < 1000; ++t) {
    GeneratorHyperparams theta;
    theta.top.n = 3 + static_cast<int>(rng.below(8));
    theta.top.k = std::min(theta.top.n - 1, 2 + static_cast<int>(rng.below(4)));
    theta.top.p = rng.uniform(0.1, 0.9);
    theta.mid.n = 1 + static_cast<int>(rng.below(10));
    theta.mid.p = rng.uniform(0.1, 0.9);
    theta.bottom.n = 3 + static_cast<int>(rng.below(8));
    theta.bottom.k = std::min(theta.bottom.n - 1, 2 + static_cast<int>(rng.below(4)));
    theta.bottom.p = rng.uniform(0.1, 0.9);
    theta.op_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
    theta.merge_weights = {0.4, 0.3, 0.3};
    const auto ir = build_hnag_topology(theta, rng.next_u64());
    ASSERT_NO_THROW(validate(ir));
    ASSERT_EQ(ir.compute_node_count(), theta.top.n * theta.mid.n * theta.bottom.n);
  }
}

TEST(Hnag, BudgetTooSmall) {
  const auto theta = theta_of({10, 4, 0.5}, {10, 0.5}, {10, 4, 0.5});
  EXPECT_THROW(sample_hnag(theta, 0, 100), BudgetError);
}

TEST(Rnag, DefaultHasNinetySixNodes) {
  const ArchitectureIR ir = sample_rnag(RnagHyperparams{}, 1, 4'000'000);
  validate(ir);
  EXPECT_EQ(ir.compute_node_count(), 96);
  EXPECT_EQ(compute_nodes_per_stage(ir), (std::map<int, int>{{0, 32}, {1, 32}, {2, 32}}));
  EXPECT_LE(count_params(ir), 4'000'000);
}

TEST(Rnag, LatticeWithoutRewiringIsSeedIndependent) {
  RnagHyperparams theta;
  theta.stages = {WsParams{10, 2, 0.0}, WsParams{10, 2, 0.0}, WsParams{10, 2, 0.0}};
  const auto a = build_rnag_topology(theta, 1);
  EXPECT_EQ(a.edges, build_rnag_topology(theta, 2).edges);
  EXPECT_EQ(sample_rnag(theta, 3, 500'000), sample_rnag(theta, 3, 500'000));
}

TEST(ThetaJson, HnagRoundTrip) {
  GeneratorHyperparams t = theta_of({6, 4, 0.8}, {1, 0.1}, {3, 2, 0.5});
  t.stage_ratio = {0.2, 0.3, 0.5};
  t.channel_ratio = {1, 2, 3};
  t.merge_weights = {0.5, 0.25, 0.25};
  t.op_weights = {0.1, 0.2, 0.3, 0.2, 0.2};
  EXPECT_EQ(hnag_theta_from_json(to_json(t)), t);
  const auto doc = to_json(t);
  EXPECT_EQ(doc.at("N_t"), 6);
  EXPECT_EQ(doc.at("P_m"), 0.1);
}

TEST(ThetaJson, DefaultsFillOptionalBlocks) {
  const auto t = hnag_theta_from_json({{"N_t", 4}, {"K_t", 2}, {"P_t", 0.5}, {"N_m", 2}, {"P_m", 0.5}, {"N_b", 4},
                                       {"K_b", 2}, {"P_b", 0.5}});
  EXPECT_EQ(t.op_weights, GeneratorHyperparams{}.op_weights);
  EXPECT_EQ(t.stage_ratio, GeneratorHyperparams{}.stage_ratio);
}

TEST(ThetaJson, RnagRoundTrip) {
  RnagHyperparams t;
  t.stages[1] = WsParams{20, 6, 0.3};
  EXPECT_EQ(rnag_theta_from_json(to_json(t)), t);
}

TEST(ThetaJson, MissingFieldIsProtocolError) {
  EXPECT_THROW(hnag_theta_from_json({{"N_t", 4}}), ProtocolError);
}

TEST(ThetaValidation, SearchRanges) {
  auto t = theta_of({11, 4, 0.5}, {1, 0.5}, {4, 2, 0.5});
  EXPECT_NO_THROW(t.validate());
  EXPECT_THROW(t.validate_search_ranges(), ParameterError);
  t.top.n = 5;
  t.stage_ratio = {0.5, -0.1, 0.6};
  EXPECT_THROW(t.validate(), ParameterError);
}

}  // namespace
}  // namespace nago
