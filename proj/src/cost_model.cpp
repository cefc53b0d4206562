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

#include "nago/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include "nago/error.hpp"

namespace nago {

namespace {

std::int64_t spatial(int input_resolution, int divisor) {
  const std::int64_t side = (input_resolution + divisor - 1) / divisor;
  return side * side;
}

bool needs_resample(const IrNode& src, const IrNode& dst) {
  return src.out_channels != dst.out_channels || src.resolution_divisor != dst.resolution_divisor;
}

}  // namespace

ParamBreakdown param_breakdown(const ArchitectureIR& ir, const CostOptions& options) {
  ParamBreakdown out;
  const auto pred = ir.predecessors();
  for (const auto& node : ir.nodes) {
    if (node.op == OpKind::Input) continue;
    const std::int64_t c = node.out_channels;
    const auto& in = pred[node.id];
    const auto k = static_cast<std::int64_t>(in.size());
    for (int u : in) {
      const std::int64_t cu = ir.nodes[u].out_channels;
      if (cu != c) out.projections += cu * c;
    }
    const MergeStrategy merge = node.op == OpKind::Output ? MergeStrategy::WeightedSum : node.merge;
    if (k >= 2) {
      switch (merge) {
        case MergeStrategy::WeightedSum: out.gates += k; break;
        case MergeStrategy::AttentionWeightedSum: out.gates += c * k + k; break;
        case MergeStrategy::Concat: out.projections += k * c * c; break;
      }
    }
    if (is_conv(node.op)) {
      const std::int64_t s = kernel_size(node.op);
      out.operations += s * s * c * c + c;
      if (options.count_norm) out.norm += 2 * c;
    }
    if (node.op == OpKind::Output && options.num_classes > 0) {
      out.head += c * options.num_classes + options.num_classes;
    }
  }
  return out;
}

std::int64_t count_params(const ArchitectureIR& ir, const CostOptions& options) {
  return param_breakdown(ir, options).total();
}

std::vector<int> stage_channels(int base_channels, std::span<const double> channel_ratio) {
  if (channel_ratio.empty()) throw ParameterError("channel ratio vector is empty");
  double smallest = channel_ratio[0];
  for (double r : channel_ratio) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("channel ratios must be positive and finite");
    smallest = std::min(smallest, r);
  }
  std::vector<int> out;
  out.reserve(channel_ratio.size());
  for (double r : channel_ratio) {
    const auto c = static_cast<long>(std::lround(base_channels * (r / smallest)));
    out.push_back(static_cast<int>(std::max(1L, c)));
  }
  return out;
}

void apply_channels(ArchitectureIR& ir, std::span<const int> channels_per_stage) {
  if (static_cast<int>(channels_per_stage.size()) != ir.stage_count) {
    throw ParameterError("apply_channels: expected " + std::to_string(ir.stage_count) + " stage channel counts");
  }
  for (auto& node : ir.nodes) {
    if (node.op == OpKind::Input) continue;
    const int stage = node.op == OpKind::Output ? ir.stage_count - 1 : node.stage;
    node.out_channels = channels_per_stage[stage];
  }
  ir.channels_per_stage.assign(channels_per_stage.begin(), channels_per_stage.end());
}

ChannelSolution solve_channels(ArchitectureIR& ir, std::span<const double> channel_ratio, std::int64_t budget,
                               const CostOptions& options) {
  if (static_cast<int>(channel_ratio.size()) != ir.stage_count) {
    throw ParameterError("solve_channels: channel ratio length must equal the stage count");
  }
  auto cost_at = [&](int base) {
    apply_channels(ir, stage_channels(base, channel_ratio));
    return count_params(ir, options);
  };
  const std::int64_t minimum = cost_at(1);
  if (minimum > budget) {
    throw BudgetError("parameter budget " + std::to_string(budget) + " is below the minimum achievable " +
                          std::to_string(minimum),
                      minimum);
  }
  constexpr int kCeiling = 1 << 20;
  int lo = 1;
  int hi = 2;
  while (hi < kCeiling && cost_at(hi) <= budget) {
    lo = hi;
    hi *= 2;
  }
  if (hi >= kCeiling && cost_at(hi) <= budget) {
    lo = hi;
  } else {
    // Invariant: cost(lo) <= budget < cost(hi).
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (cost_at(mid) <= budget) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  ChannelSolution solution;
  solution.base_channels = lo;
  solution.achieved_params = cost_at(lo);
  solution.channels_per_stage = ir.channels_per_stage;
  ir.base_channels = lo;
  return solution;
}

std::int64_t estimate_memory(const ArchitectureIR& ir, int input_resolution, int bytes_per_element) {
  const auto pred = ir.predecessors();
  std::int64_t elements = 0;
  for (const auto& node : ir.nodes) {
    const std::int64_t hw = spatial(input_resolution, node.resolution_divisor);
    const std::int64_t c = node.out_channels;
    elements += hw * c;
    if (node.op == OpKind::Input) continue;
    const auto& in = pred[node.id];
    for (int u : in) {
      if (needs_resample(ir.nodes[u], node)) elements += hw * c;
    }
    if (node.op != OpKind::Output && node.merge == MergeStrategy::Concat && in.size() >= 2) {
      elements += static_cast<std::int64_t>(in.size()) * c * hw;
    }
  }
  return elements * bytes_per_element;
}

std::int64_t estimate_flops(const ArchitectureIR& ir, int input_resolution, const CostOptions& options) {
  const auto pred = ir.predecessors();
  std::int64_t macs = 0;
  for (const auto& node : ir.nodes) {
    if (node.op == OpKind::Input) continue;
    const std::int64_t hw = spatial(input_resolution, node.resolution_divisor);
    const std::int64_t c = node.out_channels;
    const auto& in = pred[node.id];
    const auto k = static_cast<std::int64_t>(in.size());
    for (int u : in) {
      const std::int64_t cu = ir.nodes[u].out_channels;
      if (cu != c) macs += cu * c * hw;
    }
    const MergeStrategy merge = node.op == OpKind::Output ? MergeStrategy::WeightedSum : node.merge;
    if (k >= 2) {
      if (merge == MergeStrategy::Concat) macs += k * c * c * hw;
      if (merge == MergeStrategy::AttentionWeightedSum) macs += c * k;
    }
    if (is_conv(node.op)) {
      const std::int64_t s = kernel_size(node.op);
      macs += s * s * c * c * hw;
    }
    if (node.op == OpKind::Output && options.num_classes > 0) macs += c * options.num_classes;
  }
  return macs;
}

CostReport price(const ArchitectureIR& ir, const MemoryOptions& memory, const CostOptions& options) {
  CostReport report;
  report.param_count = count_params(ir, options);
  report.memory_bytes = estimate_memory(ir, memory.input_resolution, memory.bytes_per_element);
  report.memory_mb = static_cast<double>(report.memory_bytes) * memory.training_multiplier / (1024.0 * 1024.0);
  report.flops = estimate_flops(ir, memory.input_resolution, options);
  report.time_proxy = static_cast<double>(report.flops) * 1e-9 + 2e-3 * ir.compute_node_count();
  return report;
}

nlohmann::json to_json(const CostReport& report) {
  return {{"param_count", report.param_count},
          {"memory_bytes", report.memory_bytes},
          {"memory_mb", report.memory_mb},
          {"flops", report.flops},
          {"time_proxy", report.time_proxy}};
}

}  // namespace nago
