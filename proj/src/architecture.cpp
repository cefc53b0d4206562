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

#include "nago/architecture.hpp"

#include <sstream>

#include "nago/error.hpp"

namespace nago {

using nlohmann::json;

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Input: return "input";
    case OpKind::Output: return "output";
    case OpKind::Conv1x1: return "conv1x1";
    case OpKind::Conv3x3: return "conv3x3";
    case OpKind::Conv5x5: return "conv5x5";
    case OpKind::Pool3x3: return "pool3x3";
    case OpKind::Pool5x5: return "pool5x5";
  }
  return "?";
}

std::string_view to_string(MergeStrategy merge) {
  switch (merge) {
    case MergeStrategy::WeightedSum: return "weighted_sum";
    case MergeStrategy::AttentionWeightedSum: return "attention_weighted_sum";
    case MergeStrategy::Concat: return "concat";
  }
  return "?";
}

OpKind op_kind_from_string(std::string_view name) {
  for (OpKind op : {OpKind::Input, OpKind::Output, OpKind::Conv1x1, OpKind::Conv3x3, OpKind::Conv5x5,
                    OpKind::Pool3x3, OpKind::Pool5x5}) {
    if (to_string(op) == name) return op;
  }
  throw ProtocolError("unknown op kind '" + std::string(name) + "'");
}

MergeStrategy merge_from_string(std::string_view name) {
  for (MergeStrategy m : kMergeStrategies) {
    if (to_string(m) == name) return m;
  }
  throw ProtocolError("unknown merge strategy '" + std::string(name) + "'");
}

bool is_compute(OpKind op) { return op != OpKind::Input && op != OpKind::Output; }
bool is_conv(OpKind op) { return op == OpKind::Conv1x1 || op == OpKind::Conv3x3 || op == OpKind::Conv5x5; }
bool is_pool(OpKind op) { return op == OpKind::Pool3x3 || op == OpKind::Pool5x5; }

int kernel_size(OpKind op) {
  switch (op) {
    case OpKind::Conv1x1: return 1;
    case OpKind::Conv3x3:
    case OpKind::Pool3x3: return 3;
    case OpKind::Conv5x5:
    case OpKind::Pool5x5: return 5;
    default: return 0;
  }
}

int ArchitectureIR::compute_node_count() const {
  int count = 0;
  for (const auto& node : nodes) count += is_compute(node.op) ? 1 : 0;
  return count;
}

std::vector<std::vector<int>> ArchitectureIR::predecessors() const {
  std::vector<std::vector<int>> pred(nodes.size());
  for (auto [a, b] : edges) pred[b].push_back(a);
  return pred;
}

std::vector<std::vector<int>> ArchitectureIR::successors() const {
  std::vector<std::vector<int>> succ(nodes.size());
  for (auto [a, b] : edges) succ[a].push_back(b);
  return succ;
}

void validate(const ArchitectureIR& ir) {
  const int n = static_cast<int>(ir.nodes.size());
  auto fail = [](const std::string& what) { throw ParameterError("invalid architecture: " + what); };
  if (n < 2) fail("needs at least an input and an output node");
  for (int i = 0; i < n; ++i) {
    if (ir.nodes[i].id != i) fail("node id " + std::to_string(ir.nodes[i].id) + " at index " + std::to_string(i));
  }
  if (ir.input_id < 0 || ir.input_id >= n || ir.nodes[ir.input_id].op != OpKind::Input) fail("bad input node");
  if (ir.output_id < 0 || ir.output_id >= n || ir.nodes[ir.output_id].op != OpKind::Output) fail("bad output node");
  int inputs = 0, outputs = 0;
  for (const auto& node : ir.nodes) {
    inputs += node.op == OpKind::Input;
    outputs += node.op == OpKind::Output;
    const int d = node.resolution_divisor;
    if (d < 1 || (d & (d - 1)) != 0) fail("resolution divisor of node " + std::to_string(node.id) + " is not a power of two");
    if (node.out_channels < 1) fail("node " + std::to_string(node.id) + " has no channels");
  }
  if (inputs != 1 || outputs != 1) fail("exactly one input and one output node required");
  for (auto [a, b] : ir.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) fail("edge endpoint out of range");
    if (a >= b) fail("edge " + std::to_string(a) + "->" + std::to_string(b) + " does not go forward");
    if (ir.nodes[a].resolution_divisor > ir.nodes[b].resolution_divisor) {
      fail("resolution divisor decreases along edge " + std::to_string(a) + "->" + std::to_string(b));
    }
    if (b == ir.input_id) fail("input node has a predecessor");
    if (a == ir.output_id) fail("output node has a successor");
  }
  const auto pred = ir.predecessors();
  for (int v = 0; v < n; ++v) {
    if (v != ir.input_id && pred[v].empty()) fail("node " + std::to_string(v) + " has no predecessor");
  }
  // Reverse reachability from the output.
  std::vector<Edge> reversed;
  reversed.reserve(ir.edges.size());
  for (auto [a, b] : ir.edges) reversed.emplace_back(b, a);
  const auto reaches_output = reachable_from(n, reversed, ir.output_id);
  for (int v = 0; v < n; ++v) {
    if (!reaches_output[v]) fail("node " + std::to_string(v) + " does not reach the output");
  }
}

double mean_path_length(const ArchitectureIR& ir) {
  // paths[v]: number of input->v paths; length[v]: summed compute-node count
  // over those paths (including v itself). Doubles because path counts grow
  // exponentially with depth.
  const std::size_t n = ir.nodes.size();
  std::vector<double> paths(n, 0.0), length(n, 0.0);
  paths[ir.input_id] = 1.0;
  const auto pred = ir.predecessors();
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<int>(v) == ir.input_id) continue;
    for (int u : pred[v]) {
      paths[v] += paths[u];
      length[v] += length[u];
    }
    if (is_compute(ir.nodes[v].op)) length[v] += paths[v];
  }
  const double total = paths[ir.output_id];
  return total > 0.0 ? length[ir.output_id] / total : 0.0;
}

json to_json(const ArchitectureIR& ir) {
  json nodes = json::array();
  for (const auto& node : ir.nodes) {
    nodes.push_back({{"id", node.id},
                     {"op", to_string(node.op)},
                     {"out_channels", node.out_channels},
                     {"resolution_divisor", node.resolution_divisor},
                     {"merge", to_string(node.merge)},
                     {"stage", node.stage},
                     {"origin", node.origin}});
  }
  json edges = json::array();
  for (auto [a, b] : ir.edges) edges.push_back({a, b});
  return json{{"schema", kIrSchema},
              {"space", ir.space},
              {"theta", ir.theta},
              {"seed", ir.seed},
              {"param_budget", ir.param_budget},
              {"stage_count", ir.stage_count},
              {"base_channels", ir.base_channels},
              {"channels_per_stage", ir.channels_per_stage},
              {"input", ir.input_id},
              {"output", ir.output_id},
              {"nodes", nodes},
              {"edges", edges}};
}

ArchitectureIR ir_from_json(const json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kIrSchema) {
      throw ProtocolError("unsupported IR schema '" + doc.at("schema").get<std::string>() + "'");
    }
    ArchitectureIR ir;
    ir.space = doc.at("space").get<std::string>();
    ir.theta = doc.value("theta", json::object());
    ir.seed = doc.value("seed", std::uint64_t{0});
    ir.param_budget = doc.value("param_budget", std::int64_t{0});
    ir.stage_count = doc.at("stage_count").get<int>();
    ir.base_channels = doc.value("base_channels", 0);
    ir.channels_per_stage = doc.value("channels_per_stage", std::vector<int>{});
    ir.input_id = doc.at("input").get<int>();
    ir.output_id = doc.at("output").get<int>();
    for (const auto& node : doc.at("nodes")) {
      IrNode n;
      n.id = node.at("id").get<int>();
      n.op = op_kind_from_string(node.at("op").get<std::string>());
      n.out_channels = node.at("out_channels").get<int>();
      n.resolution_divisor = node.at("resolution_divisor").get<int>();
      n.merge = merge_from_string(node.value("merge", std::string("weighted_sum")));
      n.stage = node.value("stage", 0);
      if (node.contains("origin")) n.origin = node.at("origin").get<std::array<int, 3>>();
      ir.nodes.push_back(n);
    }
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ProtocolError("edge must be a [src, dst] pair");
      ir.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return ir;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("IR document: ") + e.what());
  }
}

std::string to_dot(const ArchitectureIR& ir) {
  static constexpr std::array<const char*, 6> kStageColors = {"#cfe2f3", "#d9ead3", "#fff2cc",
                                                              "#f4cccc", "#d9d2e9", "#fce5cd"};
  std::ostringstream out;
  out << "digraph architecture {\n  rankdir=TB;\n  node [style=filled];\n";
  for (const auto& node : ir.nodes) {
    out << "  n" << node.id << " [label=\"";
    if (is_compute(node.op)) {
      out << to_string(node.op) << "\\n" << node.out_channels << "ch /" << node.resolution_divisor;
      if (node.merge != MergeStrategy::WeightedSum) out << "\\n" << to_string(node.merge);
    } else {
      out << to_string(node.op);
    }
    out << "\", fillcolor=\"" << kStageColors[static_cast<std::size_t>(node.stage) % kStageColors.size()] << "\"";
    if (!is_compute(node.op)) out << ", shape=box";
    out << "];\n";
  }
  for (auto [a, b] : ir.edges) out << "  n" << a << " -> n" << b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace nago
