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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nago/random_graph.hpp"

namespace nago {

// Node kinds of a flattened architecture. Input and Output are the virtual
// endpoints (image source and classifier-head feed); the remaining five are
// the atomic operation alphabet.
enum class OpKind { Input, Output, Conv1x1, Conv3x3, Conv5x5, Pool3x3, Pool5x5 };

inline constexpr std::array<OpKind, 5> kOperationAlphabet = {
    OpKind::Conv1x1, OpKind::Conv3x3, OpKind::Conv5x5, OpKind::Pool3x3, OpKind::Pool5x5};

enum class MergeStrategy { WeightedSum, AttentionWeightedSum, Concat };

inline constexpr std::array<MergeStrategy, 3> kMergeStrategies = {
    MergeStrategy::WeightedSum, MergeStrategy::AttentionWeightedSum, MergeStrategy::Concat};

std::string_view to_string(OpKind op);
std::string_view to_string(MergeStrategy merge);
OpKind op_kind_from_string(std::string_view name);
MergeStrategy merge_from_string(std::string_view name);

bool is_compute(OpKind op);
bool is_conv(OpKind op);
bool is_pool(OpKind op);
// Spatial kernel size (1, 3 or 5); 0 for virtual nodes.
int kernel_size(OpKind op);

struct IrNode {
  int id = 0;
  OpKind op = OpKind::Conv3x3;
  int out_channels = 0;
  int resolution_divisor = 1;
  MergeStrategy merge = MergeStrategy::WeightedSum;
  int stage = 0;
  // Position in the generator hierarchy: (top, mid, bottom) for HNAG,
  // (stage, node, -1) for RNAG, all -1 for virtual nodes.
  std::array<int, 3> origin = {-1, -1, -1};

  bool operator==(const IrNode&) const = default;
};

inline constexpr std::string_view kIrSchema = "nago-ir/1";

// Flattened architecture DAG. Node ids equal their index in `nodes`, and
// every edge satisfies src < dst, so id order is a topological order.
struct ArchitectureIR {
  std::string space;  // "hnag", "rnag" or "custom"
  std::vector<IrNode> nodes;
  std::vector<Edge> edges;
  int input_id = 0;
  int output_id = 0;
  int stage_count = 1;
  int base_channels = 0;
  std::vector<int> channels_per_stage;
  // Provenance.
  nlohmann::json theta = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::int64_t param_budget = 0;

  int compute_node_count() const;
  std::vector<std::vector<int>> predecessors() const;
  std::vector<std::vector<int>> successors() const;

  bool operator==(const ArchitectureIR&) const = default;
};

// Throws ParameterError describing the first violated invariant: ids match
// indices, acyclic with src < dst, single input without predecessors, single
// output, every non-input node has a predecessor, every node reaches the
// output, divisors are powers of two and nondecreasing along edges.
void validate(const ArchitectureIR& ir);

// Mean number of compute nodes on an input-to-output path, averaged over all
// distinct paths (computed by dynamic programming, not enumeration).
double mean_path_length(const ArchitectureIR& ir);

nlohmann::json to_json(const ArchitectureIR& ir);
ArchitectureIR ir_from_json(const nlohmann::json& doc);

std::string to_dot(const ArchitectureIR& ir);

}  // namespace nago
