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
#include <vector>

#include <json.hpp>

#include "nago/architecture.hpp"

namespace nago {

// Parameter bookkeeping convention.
//
//   conv k x k       k^2 * C_in * C_out weights + C_out bias
//                    + 2 * C_out norm scale/shift when count_norm is set
//   pool             0
//   projection       C_src * C_node per incoming edge whose channel count
//                    differs from the node's (1x1, no bias)
//   weighted_sum     one scalar gate per incoming edge (in-degree >= 2)
//   attention sum    global-average-pool + linear C -> k gates: C*k + k
//   concat           1x1 reduction k*C -> C after concatenation (in-degree >= 2)
//   classifier head  C_out(output) * classes + classes when num_classes > 0
//
// All nodes of a stage carry the stage's channel count; the merge brings every
// input to that count before the operation runs.
struct CostOptions {
  bool count_norm = true;
  int num_classes = 10;
};

struct ParamBreakdown {
  std::int64_t operations = 0;
  std::int64_t norm = 0;
  std::int64_t projections = 0;
  std::int64_t gates = 0;
  std::int64_t head = 0;

  std::int64_t total() const { return operations + norm + projections + gates + head; }
};

ParamBreakdown param_breakdown(const ArchitectureIR& ir, const CostOptions& options = {});
std::int64_t count_params(const ArchitectureIR& ir, const CostOptions& options = {});

// Channels for each stage: max(1, round(base * ratio[s] / min(ratio))).
// Only relative ratios matter.
std::vector<int> stage_channels(int base_channels, std::span<const double> channel_ratio);

// Writes channels_per_stage into every node by stage. The input node keeps
// its own channel count; the output node takes the last stage's count.
void apply_channels(ArchitectureIR& ir, std::span<const int> channels_per_stage);

struct ChannelSolution {
  int base_channels = 0;
  std::vector<int> channels_per_stage;
  std::int64_t achieved_params = 0;
};

// Largest base channel count whose priced architecture stays within budget,
// found by exponential search then bisection on the monotone parameter count.
// Applies the solution to `ir`. Throws BudgetError when base 1 already
// exceeds the budget.
ChannelSolution solve_channels(ArchitectureIR& ir, std::span<const double> channel_ratio, std::int64_t budget,
                               const CostOptions& options = {});

// Activation memory model, in bytes per sample.
//
// Each node stores its output tensor (ceil(H/d) * ceil(W/d) * C). A merge
// additionally stores one resampled tensor per incoming edge that needs
// pooling or projection, and a concat merge stores its k*C buffer. The input
// node stores the image. `training_multiplier` scales the inference-style
// total to approximate activations retained for the backward pass.
struct MemoryOptions {
  int input_resolution = 32;
  int bytes_per_element = 4;
  double training_multiplier = 1.0;
};

std::int64_t estimate_memory(const ArchitectureIR& ir, int input_resolution, int bytes_per_element = 4);

// Multiply-accumulate count for one forward pass. Pooling and gates on
// feature maps are counted as free; convolutions and projections use
// k^2 * C_in * C_out * H * W.
std::int64_t estimate_flops(const ArchitectureIR& ir, int input_resolution, const CostOptions& options = {});

struct CostReport {
  std::int64_t param_count = 0;
  std::int64_t memory_bytes = 0;
  double memory_mb = 0.0;  // bytes * training_multiplier / 2^20
  std::int64_t flops = 0;
  // flops * 1e-9 + 2e-3 * compute nodes; unitless, monotone in both.
  double time_proxy = 0.0;
};

CostReport price(const ArchitectureIR& ir, const MemoryOptions& memory = {}, const CostOptions& options = {});

nlohmann::json to_json(const CostReport& report);

}  // namespace nago
