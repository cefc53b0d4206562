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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nago {

using Edge = std::pair<int, int>;

enum class GraphModel { WattsStrogatz, ErdosRenyi };

std::string to_string(GraphModel model);

// Watts-Strogatz parameters. Each node is joined to floor(k/2) ring
// neighbours on each side, so an odd k behaves like k - 1.
struct WsParams {
  int n = 0;
  int k = 0;
  double p = 0.0;

  void validate() const;
  bool operator==(const WsParams&) const = default;
};

struct ErParams {
  int n = 0;
  double p = 0.0;

  void validate() const;
  bool operator==(const ErParams&) const = default;
};

// Undirected simple graph. Edges are stored as (u, v) with u < v, sorted.
struct RandomGraph {
  int node_count = 0;
  std::vector<Edge> edges;
  GraphModel model = GraphModel::WattsStrogatz;
  std::uint64_t seed = 0;

  bool operator==(const RandomGraph&) const = default;
};

// Optional bookkeeping of the WS rewiring pass.
struct WsTrace {
  int lattice_edges = 0;
  int rewired = 0;      // lattice edges that were moved to a new target
  int kept_on_retry = 0;  // rewiring attempts abandoned after n redraws
};

RandomGraph generate_ws(const WsParams& params, std::uint64_t seed, WsTrace* trace = nullptr);
RandomGraph generate_er(const ErParams& params, std::uint64_t seed);

// Single-source single-sink DAG built from an undirected graph.
//
// Node 0 is the virtual input, original node i becomes node i + 1 and the
// virtual output is node node_count - 1. Every edge goes from a lower to a
// higher index.
struct Dag {
  int node_count = 0;
  std::vector<Edge> edges;
  int input_node = 0;
  int output_node = 0;

  int original_count() const { return node_count - 2; }
  // Original indices of nodes fed by the virtual input / feeding the output.
  std::vector<int> entry_nodes() const;
  std::vector<int> exit_nodes() const;
  // Edges between original nodes, in original indices.
  std::vector<Edge> original_edges() const;

  bool operator==(const Dag&) const = default;
};

Dag to_dag(const RandomGraph& graph);

// Kahn's algorithm with smallest-index-first tie breaking. Throws
// ParameterError if the edge set contains a cycle.
std::vector<int> topological_order(int node_count, std::span<const Edge> edges);

// Nodes reachable from `source` following edges forwards.
std::vector<bool> reachable_from(int node_count, std::span<const Edge> edges, int source);

nlohmann::json to_json(const RandomGraph& graph);
nlohmann::json to_json(const Dag& dag);
RandomGraph random_graph_from_json(const nlohmann::json& doc);
Dag dag_from_json(const nlohmann::json& doc);

std::string to_dot(const RandomGraph& graph);
std::string to_dot(const Dag& dag);

}  // namespace nago
