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

#include "nago/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nago/error.hpp"
#include "nago/random.hpp"

namespace nago {

using nlohmann::json;

namespace {

// Stream tags for the hierarchy levels.
constexpr std::uint64_t kTopTag = 1;
constexpr std::uint64_t kMidTag = 2;
constexpr std::uint64_t kBottomTag = 3;
constexpr std::uint64_t kAssignTag = 4;
constexpr std::uint64_t kRnagStageTag = 5;

void check_range(const char* name, double value, double lo, double hi) {
  if (value < lo || value > hi) {
    throw ParameterError(std::string(name) + "=" + std::to_string(value) + " outside search range [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

void check_simplex(const char* name, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError(std::string(name) + ": weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ParameterError(std::string(name) + ": weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

void check_positive(const char* name, std::span<const double> values) {
  if (values.empty()) throw ParameterError(std::string(name) + " must not be empty");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " entries must be positive");
  }
}

int pow2(int e) { return 1 << e; }

}  // namespace

void GeneratorHyperparams::validate() const {
  top.validate();
  mid.validate();
  bottom.validate();
  check_positive("theta_S", stage_ratio);
  check_positive("theta_C", channel_ratio);
  if (channel_ratio.size() != stage_ratio.size()) {
    throw ParameterError("theta_C must have one entry per stage");
  }
  check_simplex("theta_M", merge_weights);
  check_simplex("theta_op", op_weights);
}

void GeneratorHyperparams::validate_search_ranges() const {
  validate();
  check_range("N_t", top.n, 3, 10);
  check_range("K_t", top.k, 2, 5);
  check_range("P_t", top.p, 0.1, 0.9);
  check_range("N_m", mid.n, 1, 10);
  check_range("P_m", mid.p, 0.1, 0.9);
  check_range("N_b", bottom.n, 3, 10);
  check_range("K_b", bottom.k, 2, 5);
  check_range("P_b", bottom.p, 0.1, 0.9);
}

void RnagHyperparams::validate() const {
  for (const auto& s : stages) s.validate();
  check_positive("theta_C", channel_ratio);
  if (channel_ratio.size() != stages.size()) throw ParameterError("RNAG theta_C must have three entries");
}

void RnagHyperparams::validate_search_ranges() const {
  validate();
  for (const auto& s : stages) {
    check_range("N_i", s.n, 10, 40);
    check_range("K_i", s.k, 2, 9);
    check_range("P_i", s.p, 0.1, 0.9);
  }
}

json to_json(const GeneratorHyperparams& theta) {
  return json{{"N_t", theta.top.n},       {"K_t", theta.top.k},         {"P_t", theta.top.p},
              {"N_m", theta.mid.n},       {"P_m", theta.mid.p},         {"N_b", theta.bottom.n},
              {"K_b", theta.bottom.k},    {"P_b", theta.bottom.p},      {"theta_S", theta.stage_ratio},
              {"theta_C", theta.channel_ratio}, {"theta_M", theta.merge_weights}, {"theta_op", theta.op_weights}};
}

json to_json(const RnagHyperparams& theta) {
  json doc = json::object();
  for (int s = 0; s < 3; ++s) {
    const auto suffix = std::to_string(s + 1);
    doc["N_" + suffix] = theta.stages[s].n;
    doc["K_" + suffix] = theta.stages[s].k;
    doc["P_" + suffix] = theta.stages[s].p;
  }
  doc["theta_C"] = theta.channel_ratio;
  return doc;
}

GeneratorHyperparams hnag_theta_from_json(const json& doc) {
  try {
    GeneratorHyperparams t;
    t.top = WsParams{doc.at("N_t").get<int>(), doc.at("K_t").get<int>(), doc.at("P_t").get<double>()};
    t.mid = ErParams{doc.at("N_m").get<int>(), doc.at("P_m").get<double>()};
    t.bottom = WsParams{doc.at("N_b").get<int>(), doc.at("K_b").get<int>(), doc.at("P_b").get<double>()};
    if (doc.contains("theta_S")) t.stage_ratio = doc.at("theta_S").get<std::vector<double>>();
    if (doc.contains("theta_C")) t.channel_ratio = doc.at("theta_C").get<std::vector<double>>();
    if (doc.contains("theta_M")) t.merge_weights = doc.at("theta_M").get<std::array<double, 3>>();
    if (doc.contains("theta_op")) t.op_weights = doc.at("theta_op").get<std::array<double, 5>>();
    return t;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("HNAG theta document: ") + e.what());
  }
}

RnagHyperparams rnag_theta_from_json(const json& doc) {
  try {
    RnagHyperparams t;
    for (int s = 0; s < 3; ++s) {
      const auto suffix = std::to_string(s + 1);
      t.stages[s] = WsParams{doc.at("N_" + suffix).get<int>(), doc.at("K_" + suffix).get<int>(),
                             doc.at("P_" + suffix).get<double>()};
    }
    if (doc.contains("theta_C")) t.channel_ratio = doc.at("theta_C").get<std::vector<double>>();
    return t;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("RNAG theta document: ") + e.what());
  }
}

std::vector<int> split_stages(int top_node_count, std::span<const double> stage_ratio) {
  check_positive("theta_S", stage_ratio);
  const int stages = static_cast<int>(stage_ratio.size());
  if (top_node_count < stages) {
    throw InfeasibleSplitError("cannot split " + std::to_string(top_node_count) + " top-level nodes into " +
                               std::to_string(stages) + " stages");
  }
  const double total = std::accumulate(stage_ratio.begin(), stage_ratio.end(), 0.0);
  std::vector<int> counts(stages);
  std::vector<double> remainder(stages);
  int assigned = 0;
  for (int s = 0; s < stages; ++s) {
    const double quota = top_node_count * (stage_ratio[s] / total);
    counts[s] = static_cast<int>(std::floor(quota + 1e-9));
    remainder[s] = quota - counts[s];
    assigned += counts[s];
  }
  std::vector<int> order(stages);
  std::iota(order.begin(), order.end(), 0);
  // Remainders within 1e-9 count as tied; stable sort keeps earlier stages first.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b] + 1e-9; });
  for (int i = 0; assigned < top_node_count; i = (i + 1) % stages, ++assigned) ++counts[order[i]];
  // Minimum of one node per stage, taken from the currently largest stage
  // (the later one on ties).
  for (int s = 0; s < stages; ++s) {
    while (counts[s] < 1) {
      int donor = 0;
      for (int t = 0; t < stages; ++t) {
        if (counts[t] >= counts[donor]) donor = t;
      }
      --counts[donor];
      ++counts[s];
    }
  }
  return counts;
}

std::vector<NodeAssignment> sample_merge_and_ops(int node_count, std::span<const double> merge_weights,
                                                 std::span<const double> op_weights, std::uint64_t seed) {
  if (merge_weights.size() != kMergeStrategies.size()) throw ParameterError("theta_M must have 3 weights");
  if (op_weights.size() != kOperationAlphabet.size()) throw ParameterError("theta_op must have 5 weights");
  check_simplex("theta_M", merge_weights);
  check_simplex("theta_op", op_weights);
  RandomStream rng(seed);
  std::vector<NodeAssignment> out(static_cast<std::size_t>(std::max(node_count, 0)));
  for (auto& a : out) {
    a.merge = kMergeStrategies[rng.categorical(merge_weights)];
    a.op = kOperationAlphabet[rng.categorical(op_weights)];
  }
  return out;
}

namespace {

void add_cross(std::vector<Edge>& edges, const std::vector<int>& from, const std::vector<int>& to) {
  for (int a : from) {
    for (int b : to) edges.emplace_back(a, b);
  }
}

void finish_ir(ArchitectureIR& ir) {
  std::sort(ir.edges.begin(), ir.edges.end());
  ir.edges.erase(std::unique(ir.edges.begin(), ir.edges.end()), ir.edges.end());
  apply_channels(ir, std::vector<int>(ir.stage_count, 1));
  ir.base_channels = 1;
}

IrNode virtual_node(int id, OpKind op, int channels, int stage) {
  IrNode node;
  node.id = id;
  node.op = op;
  node.out_channels = channels;
  node.stage = stage;
  node.resolution_divisor = pow2(stage);
  return node;
}

}  // namespace

ArchitectureIR build_hnag_topology(const GeneratorHyperparams& theta, std::uint64_t seed, const SampleOptions& options) {
  theta.validate();
  const RandomStream root(seed);
  const int stage_count = static_cast<int>(theta.stage_ratio.size());
  const auto stage_sizes = split_stages(theta.top.n, theta.stage_ratio);
  std::vector<int> stage_of_top;
  for (int s = 0; s < stage_count; ++s) stage_of_top.insert(stage_of_top.end(), stage_sizes[s], s);

  ArchitectureIR ir;
  ir.space = "hnag";
  ir.stage_count = stage_count;
  ir.theta = to_json(theta);
  ir.seed = seed;
  ir.nodes.push_back(virtual_node(0, OpKind::Input, options.input_channels, 0));

  const Dag top = to_dag(generate_ws(theta.top, root.derive_seed({kTopTag})));
  const int n_top = theta.top.n;
  std::vector<std::vector<int>> top_entries(n_top), top_exits(n_top);

  for (int t = 0; t < n_top; ++t) {
    const Dag mid = to_dag(generate_er(theta.mid, root.derive_seed({kMidTag, static_cast<std::uint64_t>(t)})));
    const int n_mid = theta.mid.n;
    std::vector<std::vector<int>> mid_entries(n_mid), mid_exits(n_mid);
    for (int m = 0; m < n_mid; ++m) {
      const auto t64 = static_cast<std::uint64_t>(t);
      const auto m64 = static_cast<std::uint64_t>(m);
      const Dag bottom = to_dag(generate_ws(theta.bottom, root.derive_seed({kBottomTag, t64, m64})));
      const auto assign = sample_merge_and_ops(theta.bottom.n, theta.merge_weights, theta.op_weights,
                                               root.derive_seed({kAssignTag, t64, m64}));
      const int first_id = static_cast<int>(ir.nodes.size());
      for (int b = 0; b < theta.bottom.n; ++b) {
        IrNode node;
        node.id = first_id + b;
        node.op = assign[b].op;
        node.merge = assign[b].merge;
        node.stage = stage_of_top[t];
        node.resolution_divisor = pow2(node.stage);
        node.origin = {t, m, b};
        ir.nodes.push_back(node);
      }
      for (auto [a, b] : bottom.original_edges()) ir.edges.emplace_back(first_id + a, first_id + b);
      for (int b : bottom.entry_nodes()) mid_entries[m].push_back(first_id + b);
      for (int b : bottom.exit_nodes()) mid_exits[m].push_back(first_id + b);
    }
    for (auto [a, b] : mid.original_edges()) add_cross(ir.edges, mid_exits[a], mid_entries[b]);
    for (int m : mid.entry_nodes()) top_entries[t].insert(top_entries[t].end(), mid_entries[m].begin(), mid_entries[m].end());
    for (int m : mid.exit_nodes()) top_exits[t].insert(top_exits[t].end(), mid_exits[m].begin(), mid_exits[m].end());
  }
  for (auto [a, b] : top.original_edges()) add_cross(ir.edges, top_exits[a], top_entries[b]);

  const int output_id = static_cast<int>(ir.nodes.size());
  ir.nodes.push_back(virtual_node(output_id, OpKind::Output, 1, stage_count - 1));
  for (int t : top.entry_nodes()) add_cross(ir.edges, {0}, top_entries[t]);
  for (int t : top.exit_nodes()) add_cross(ir.edges, top_exits[t], {output_id});
  ir.input_id = 0;
  ir.output_id = output_id;
  finish_ir(ir);
  return ir;
}

ArchitectureIR sample_hnag(const GeneratorHyperparams& theta, std::uint64_t seed, std::int64_t param_budget,
                           const SampleOptions& options) {
  ArchitectureIR ir = build_hnag_topology(theta, seed, options);
  solve_channels(ir, theta.channel_ratio, param_budget, options.cost);
  ir.param_budget = param_budget;
  return ir;
}

ArchitectureIR build_rnag_topology(const RnagHyperparams& theta, std::uint64_t seed, const SampleOptions& options) {
  theta.validate();
  const RandomStream root(seed);
  ArchitectureIR ir;
  ir.space = "rnag";
  ir.stage_count = 3;
  ir.theta = to_json(theta);
  ir.seed = seed;
  ir.nodes.push_back(virtual_node(0, OpKind::Input, options.input_channels, 0));
  std::vector<int> previous_exits{0};
  for (int s = 0; s < 3; ++s) {
    const Dag g = to_dag(generate_ws(theta.stages[s], root.derive_seed({kRnagStageTag, static_cast<std::uint64_t>(s)})));
    const int first_id = static_cast<int>(ir.nodes.size());
    for (int v = 0; v < theta.stages[s].n; ++v) {
      IrNode node;
      node.id = first_id + v;
      node.op = OpKind::Conv3x3;
      node.merge = MergeStrategy::WeightedSum;
      node.stage = s;
      node.resolution_divisor = pow2(s);
      node.origin = {s, v, -1};
      ir.nodes.push_back(node);
    }
    for (auto [a, b] : g.original_edges()) ir.edges.emplace_back(first_id + a, first_id + b);
    std::vector<int> entries, exits;
    for (int v : g.entry_nodes()) entries.push_back(first_id + v);
    for (int v : g.exit_nodes()) exits.push_back(first_id + v);
    add_cross(ir.edges, previous_exits, entries);
    previous_exits = std::move(exits);
  }
  const int output_id = static_cast<int>(ir.nodes.size());
  ir.nodes.push_back(virtual_node(output_id, OpKind::Output, 1, 2));
  add_cross(ir.edges, previous_exits, {output_id});
  ir.input_id = 0;
  ir.output_id = output_id;
  finish_ir(ir);
  return ir;
}

ArchitectureIR sample_rnag(const RnagHyperparams& theta, std::uint64_t seed, std::int64_t param_budget,
                           const SampleOptions& options) {
  ArchitectureIR ir = build_rnag_topology(theta, seed, options);
  solve_channels(ir, theta.channel_ratio, param_budget, options.cost);
  ir.param_budget = param_budget;
  return ir;
}

}  // namespace nago
