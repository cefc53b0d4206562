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

#include "nago/architecture.hpp"
#include "nago/cost_model.hpp"

namespace nago {

// Pseudo-error used by the proxy evaluator, version "proxy-v1".
//
// A smooth stand-in for validation error built from the cost model and graph
// statistics. It rewards compute (log10 FLOPs) and penalizes departures from
// a moderate mean path length and node count:
//
//   s = 0.8 * (log10 F - 8.5) - 0.35 * (ln L - ln 8)^2 - 0.25 * (ln n - ln 60)^2
//   e_full = 0.03 + 0.40 / (1 + exp(s + 1))
//
// with F the MAC count, L the mean input-to-output path length and n the
// compute node count. It says nothing about real accuracy.
struct ProxyFeatures {
  double log10_flops = 0.0;
  double mean_path_length = 0.0;
  int compute_nodes = 0;
};

ProxyFeatures proxy_features(const ArchitectureIR& ir, const CostReport& cost);

double proxy_error_full_budget(const ProxyFeatures& features);

// Error at a partial budget: the full-budget value plus a gap that shrinks
// linearly to zero at max_budget, plus Gaussian noise with standard deviation
// 0.01 * sqrt(max_budget / budget) drawn from noise_seed. Clamped to [0, 1].
double proxy_error(const ProxyFeatures& features, double budget, double max_budget, std::uint64_t noise_seed);

}  // namespace nago
