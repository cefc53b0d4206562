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

#include "fixtures.hpp"
#include "nago/architecture.hpp"
#include "nago/error.hpp"
#include "nago/generator.hpp"

namespace nago {
namespace {

using testing::small_irs;

ArchitectureIR chain() { return small_irs().front().ir; }

TEST(OpKind, StringRoundTrip) {
  for (OpKind op : {OpKind::Input, OpKind::Output, OpKind::Conv1x1, OpKind::Conv3x3, OpKind::Conv5x5,
                    OpKind::Pool3x3, OpKind::Pool5x5}) {
    EXPECT_EQ(op_kind_from_string(to_string(op)), op);
  }
  EXPECT_THROW(op_kind_from_string("conv7x7"), ProtocolError);
  EXPECT_EQ(kernel_size(OpKind::Conv5x5), 5);
  EXPECT_TRUE(is_pool(OpKind::Pool3x3));
  EXPECT_FALSE(is_compute(OpKind::Input));
}

TEST(MergeStrategy, StringRoundTrip) {
  for (MergeStrategy m : {MergeStrategy::WeightedSum, MergeStrategy::AttentionWeightedSum, MergeStrategy::Concat}) {
    EXPECT_EQ(merge_from_string(to_string(m)), m);
  }
  EXPECT_THROW(merge_from_string("max"), ProtocolError);
}

TEST(ArchitectureIR, FixturesAreValid) {
  for (const auto& c : small_irs()) EXPECT_NO_THROW(validate(c.ir)) << c.name;
}

TEST(ArchitectureIR, MeanPathLengthFixtures) {
  for (const auto& c : small_irs()) EXPECT_DOUBLE_EQ(mean_path_length(c.ir), c.mean_path_length) << c.name;
}

TEST(ArchitectureIR, RejectsBackwardEdge) {
  auto ir = chain();
  ir.edges.push_back({2, 1});
  EXPECT_THROW(validate(ir), ParameterError);
}

TEST(ArchitectureIR, RejectsOrphanNode) {
  auto ir = chain();
  IrNode extra = ir.nodes[1];
  extra.id = 3;
  ir.nodes.push_back(extra);
  EXPECT_THROW(validate(ir), ParameterError);
}

TEST(ArchitectureIR, RejectsDeadEnd) {
  auto ir = chain();
  IrNode extra = ir.nodes[1];
  extra.id = 3;
  ir.nodes.push_back(extra);
  ir.edges.push_back({1, 3});
  EXPECT_THROW(validate(ir), ParameterError);
}

TEST(ArchitectureIR, RejectsUpsampling) {
  auto ir = small_irs().back().ir;  // downsample fixture
  ir.nodes[3].resolution_divisor = 1;
  EXPECT_THROW(validate(ir), ParameterError);
}

TEST(ArchitectureIR, RejectsNonPowerOfTwoDivisor) {
  auto ir = chain();
  ir.nodes[1].resolution_divisor = 3;
  ir.nodes[2].resolution_divisor = 3;
  EXPECT_THROW(validate(ir), ParameterError);
}

TEST(ArchitectureIR, JsonRoundTrip) {
  for (const auto& c : small_irs()) EXPECT_EQ(ir_from_json(to_json(c.ir)), c.ir) << c.name;
  GeneratorHyperparams theta;
  theta.top = {5, 2, 0.5};
  theta.mid = {3, 0.5};
  const auto ir = sample_hnag(theta, 9, 2'000'000);
  EXPECT_EQ(ir_from_json(to_json(ir)), ir);
}

TEST(ArchitectureIR, RejectsUnknownSchema) {
  auto doc = to_json(chain());
  doc["schema"] = "nago-ir/0";
  EXPECT_THROW(ir_from_json(doc), ProtocolError);
}

TEST(ArchitectureIR, DotListsNodesAndEdges) {
  const auto c = small_irs()[2];
  const std::string dot = to_dot(c.ir);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  for (auto [a, b] : c.ir.edges) {
    EXPECT_NE(dot.find("n" + std::to_string(a) + " -> n" + std::to_string(b) + ";"), std::string::npos);
  }
  EXPECT_NE(dot.find("concat"), std::string::npos);
}

TEST(ArchitectureIR, PredecessorsAndSuccessors) {
  const auto ir = small_irs()[2].ir;
  EXPECT_EQ(ir.predecessors()[3], (std::vector<int>{1, 2}));
  EXPECT_EQ(ir.successors()[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(ir.compute_node_count(), 3);
}

}  // namespace
}  // namespace nago
