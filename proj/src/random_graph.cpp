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

#include "nago/random_graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "nago/error.hpp"
#include "nago/random.hpp"

namespace nago {

using nlohmann::json;

std::string to_string(GraphModel model) {
  return model == GraphModel::WattsStrogatz ? "WS" : "ER";
}

void WsParams::validate() const {
  if (n < 3) throw ParameterError("WS: n must be >= 3, got " + std::to_string(n));
  if (k < 2 || k >= n) {
    throw ParameterError("WS: k must satisfy 2 <= k < n, got k=" + std::to_string(k) +
                         " n=" + std::to_string(n));
  }
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("WS: p must lie in [0, 1]");
}

void ErParams::validate() const {
  if (n < 1) throw ParameterError("ER: n must be >= 1, got " + std::to_string(n));
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("ER: p must lie in [0, 1]");
}

namespace {

class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(int n) : n_(n), bits_(static_cast<std::size_t>(n) * n, 0), degree_(n, 0) {}

  bool has(int u, int v) const { return bits_[index(u, v)] != 0; }
  int degree(int u) const { return degree_[u]; }

  void add(int u, int v) {
    bits_[index(u, v)] = bits_[index(v, u)] = 1;
    ++degree_[u];
    ++degree_[v];
  }
  void remove(int u, int v) {
    bits_[index(u, v)] = bits_[index(v, u)] = 0;
    --degree_[u];
    --degree_[v];
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < n_; ++u) {
      for (int v = u + 1; v < n_; ++v) {
        if (has(u, v)) out.emplace_back(u, v);
      }
    }
    return out;
  }

 private:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(u) * n_ + v; }

  int n_;
  std::vector<char> bits_;
  std::vector<int> degree_;
};

}  // namespace

RandomGraph generate_ws(const WsParams& params, std::uint64_t seed, WsTrace* trace) {
  params.validate();
  const int n = params.n;
  const int half = params.k / 2;
  RandomStream rng(seed);
  AdjacencyMatrix adj(n);
  for (int j = 1; j <= half; ++j) {
    for (int u = 0; u < n; ++u) adj.add(u, (u + j) % n);
  }
  WsTrace local;
  local.lattice_edges = n * half;
  // Rewire in lattice order: ring distance j outer, source node u inner.
  for (int j = 1; j <= half; ++j) {
    for (int u = 0; u < n; ++u) {
      const int v = (u + j) % n;
      if (!rng.bernoulli(params.p)) continue;
      if (!adj.has(u, v)) continue;  // already moved by an earlier rewire
      bool placed = false;
      for (int attempt = 0; attempt < n; ++attempt) {
        const int w = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (w == u || adj.has(u, w)) continue;
        adj.remove(u, v);
        adj.add(u, w);
        placed = true;
        break;
      }
      if (placed) {
        ++local.rewired;
      } else {
        ++local.kept_on_retry;
      }
    }
  }
  if (trace != nullptr) *trace = local;
  return RandomGraph{n, adj.edges(), GraphModel::WattsStrogatz, seed};
}

RandomGraph generate_er(const ErParams& params, std::uint64_t seed) {
  params.validate();
  RandomStream rng(seed);
  RandomGraph g{params.n, {}, GraphModel::ErdosRenyi, seed};
  for (int u = 0; u < params.n; ++u) {
    for (int v = u + 1; v < params.n; ++v) {
      if (rng.bernoulli(params.p)) g.edges.emplace_back(u, v);
    }
  }
  return g;
}

Dag to_dag(const RandomGraph& graph) {
  if (graph.node_count < 1) throw ParameterError("to_dag: graph needs at least one node");
  const int n = graph.node_count;
  Dag dag;
  dag.node_count = n + 2;
  dag.input_node = 0;
  dag.output_node = n + 1;
  std::vector<int> indeg(n, 0), outdeg(n, 0);
  for (auto [a, b] : graph.edges) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    ++outdeg[lo];
    ++indeg[hi];
    dag.edges.emplace_back(lo + 1, hi + 1);
  }
  for (int i = 0; i < n; ++i) {
    if (indeg[i] == 0) dag.edges.emplace_back(0, i + 1);
    if (outdeg[i] == 0) dag.edges.emplace_back(i + 1, n + 1);
  }
  std::sort(dag.edges.begin(), dag.edges.end());
  dag.edges.erase(std::unique(dag.edges.begin(), dag.edges.end()), dag.edges.end());
  return dag;
}

std::vector<int> Dag::entry_nodes() const {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    if (a == input_node) out.push_back(b - 1);
  }
  return out;
}

std::vector<int> Dag::exit_nodes() const {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    if (b == output_node) out.push_back(a - 1);
  }
  return out;
}

std::vector<Edge> Dag::original_edges() const {
  std::vector<Edge> out;
  for (auto [a, b] : edges) {
    if (a != input_node && b != output_node) out.emplace_back(a - 1, b - 1);
  }
  return out;
}

std::vector<int> topological_order(int node_count, std::span<const Edge> edges) {
  std::vector<std::vector<int>> succ(node_count);
  std::vector<int> indeg(node_count, 0);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw ParameterError("topological_order: edge endpoint out of range");
    }
    succ[a].push_back(b);
    ++indeg[b];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < node_count; ++v) {
    if (indeg[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : succ[v]) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(order.size()) != node_count) {
    throw ParameterError("topological_order: graph contains a cycle");
  }
  return order;
}

std::vector<bool> reachable_from(int node_count, std::span<const Edge> edges, int source) {
  std::vector<std::vector<int>> succ(node_count);
  for (auto [a, b] : edges) succ[a].push_back(b);
  std::vector<bool> seen(node_count, false);
  std::vector<int> stack{source};
  seen[source] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : succ[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

namespace {

json edges_to_json(const std::vector<Edge>& edges) {
  json arr = json::array();
  for (auto [a, b] : edges) arr.push_back({a, b});
  return arr;
}

std::vector<Edge> edges_from_json(const json& arr, int node_count) {
  std::vector<Edge> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2) throw ProtocolError("edge must be a [src, dst] pair");
    Edge edge{e[0].get<int>(), e[1].get<int>()};
    if (edge.first < 0 || edge.second < 0 || edge.first >= node_count || edge.second >= node_count) {
      throw ProtocolError("edge endpoint out of range");
    }
    out.push_back(edge);
  }
  return out;
}

}  // namespace

json to_json(const RandomGraph& graph) {
  return json{{"schema", "nago-graph/1"},
              {"kind", "undirected"},
              {"model", to_string(graph.model)},
              {"seed", graph.seed},
              {"node_count", graph.node_count},
              {"edges", edges_to_json(graph.edges)}};
}

json to_json(const Dag& dag) {
  return json{{"schema", "nago-graph/1"},
              {"kind", "dag"},
              {"node_count", dag.node_count},
              {"input_node", dag.input_node},
              {"output_node", dag.output_node},
              {"edges", edges_to_json(dag.edges)}};
}

RandomGraph random_graph_from_json(const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "undirected") throw ProtocolError("expected an undirected graph document");
    RandomGraph g;
    g.node_count = doc.at("node_count").get<int>();
    const auto model = doc.at("model").get<std::string>();
    if (model != "WS" && model != "ER") throw ProtocolError("unknown graph model '" + model + "'");
    g.model = model == "WS" ? GraphModel::WattsStrogatz : GraphModel::ErdosRenyi;
    g.seed = doc.at("seed").get<std::uint64_t>();
    g.edges = edges_from_json(doc.at("edges"), g.node_count);
    for (auto& [a, b] : g.edges) {
      if (a == b) throw ProtocolError("self-loop in graph document");
      if (a > b) std::swap(a, b);
    }
    std::sort(g.edges.begin(), g.edges.end());
    if (std::adjacent_find(g.edges.begin(), g.edges.end()) != g.edges.end()) {
      throw ProtocolError("duplicate edge in graph document");
    }
    return g;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("graph document: ") + e.what());
  }
}

Dag dag_from_json(const json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "dag") throw ProtocolError("expected a dag document");
    Dag d;
    d.node_count = doc.at("node_count").get<int>();
    d.input_node = doc.at("input_node").get<int>();
    d.output_node = doc.at("output_node").get<int>();
    d.edges = edges_from_json(doc.at("edges"), d.node_count);
    for (auto [a, b] : d.edges) {
      if (a >= b) throw ProtocolError("dag edges must go from lower to higher index");
    }
    return d;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("dag document: ") + e.what());
  }
}

std::string to_dot(const RandomGraph& graph) {
  std::ostringstream out;
  out << "graph " << to_string(graph.model) << " {\n";
  for (int v = 0; v < graph.node_count; ++v) out << "  n" << v << ";\n";
  for (auto [a, b] : graph.edges) out << "  n" << a << " -- n" << b << ";\n";
  out << "}\n";
  return out.str();
}

std::string to_dot(const Dag& dag) {
  std::ostringstream out;
  out << "digraph dag {\n  rankdir=LR;\n";
  for (int v = 0; v < dag.node_count; ++v) {
    out << "  n" << v;
    if (v == dag.input_node) {
      out << " [label=\"in\", shape=box]";
    } else if (v == dag.output_node) {
      out << " [label=\"out\", shape=box]";
    } else {
      out << " [label=\"" << (v - 1) << "\"]";
    }
    out << ";\n";
  }
  for (auto [a, b] : dag.edges) out << "  n" << a << " -> n" << b << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace nago
