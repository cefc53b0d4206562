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

#include "nago/proxy_model.hpp"

#include <algorithm>
#include <cmath>

#include "nago/random.hpp"

namespace nago {

ProxyFeatures proxy_features(const ArchitectureIR& ir, const CostReport& cost) {
  ProxyFeatures f;
  f.log10_flops = std::log10(std::max<double>(1.0, static_cast<double>(cost.flops)));
  f.mean_path_length = mean_path_length(ir);
  f.compute_nodes = ir.compute_node_count();
  return f;
}

double proxy_error_full_budget(const ProxyFeatures& f) {
  const double path = std::log(std::max(1.0, f.mean_path_length)) - std::log(8.0);
  const double nodes = std::log(std::max(1, f.compute_nodes)) - std::log(60.0);
  const double s = 0.8 * (f.log10_flops - 8.5) - 0.35 * path * path - 0.25 * nodes * nodes;
  return 0.03 + 0.40 / (1.0 + std::exp(s + 1.0));
}

double proxy_error(const ProxyFeatures& features, double budget, double max_budget, std::uint64_t noise_seed) {
  const double b = std::clamp(budget, 1e-9, max_budget);
  const double gap = 0.15 * (1.0 - b / max_budget);
  RandomStream rng(noise_seed);
  const double noise = 0.01 * std::sqrt(max_budget / b) * rng.normal();
  return std::clamp(proxy_error_full_budget(features) + gap + noise, 0.0, 1.0);
}

}  // namespace nago
