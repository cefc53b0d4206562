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

#include <cmath>

#include "fixtures.hpp"
#include "nago/proxy_model.hpp"
#include "nago/random.hpp"

namespace nago {
namespace {

double reference_full(double log10_flops, double path, int nodes) {
  const double a = std::log(path) - std::log(8.0);
  const double b = std::log(static_cast<double>(nodes)) - std::log(60.0);
  const double s = 0.8 * (log10_flops - 8.5) - 0.35 * a * a - 0.25 * b * b;
  return 0.03 + 0.40 / (1.0 + std::exp(s + 1.0));
}

TEST(ProxyModel, FeaturesFromIr) {
  const auto c = testing::small_irs()[2];
  const auto cost = price(c.ir);
  const auto f = proxy_features(c.ir, cost);
  EXPECT_DOUBLE_EQ(f.log10_flops, std::log10(static_cast<double>(c.flops)));
  EXPECT_DOUBLE_EQ(f.mean_path_length, 2.0);
  EXPECT_EQ(f.compute_nodes, 3);
}

TEST(ProxyModel, FullBudgetFormula) {
  for (double lf : {6.0, 8.5, 9.7}) {
    for (double path : {2.0, 8.0, 20.0}) {
      for (int n : {5, 60, 300}) {
        EXPECT_NEAR(proxy_error_full_budget({lf, path, n}), reference_full(lf, path, n), 1e-15);
      }
    }
  }
}

TEST(ProxyModel, FullBudgetRange) {
  RandomStream rng(1);
  for (int t = 0; t < 1000; ++t) {
    const ProxyFeatures f{rng.uniform(5, 11), rng.uniform(1, 50), 1 + static_cast<int>(rng.below(1000))};
    const double e = proxy_error_full_budget(f);
    EXPECT_GT(e, 0.03);
    EXPECT_LT(e, 0.43);
  }
}

TEST(ProxyModel, MoreComputeLowersError) {
  EXPECT_LT(proxy_error_full_budget({9.5, 8.0, 60}), proxy_error_full_budget({8.0, 8.0, 60}));
}

TEST(ProxyModel, PartialBudgetGapAndNoise) {
  const ProxyFeatures f{8.7, 7.0, 40};
  const double full = proxy_error_full_budget(f);
  const std::uint64_t seed = 1234;
  RandomStream rng(seed);
  const double z = rng.normal();
  EXPECT_NEAR(proxy_error(f, 30, 120, seed), full + 0.15 * (1 - 30.0 / 120) + 0.01 * 2.0 * z, 1e-15);
  RandomStream rng2(seed);
  EXPECT_NEAR(proxy_error(f, 120, 120, seed), full + 0.01 * rng2.normal(), 1e-15);
  EXPECT_EQ(proxy_error(f, 60, 120, 5), proxy_error(f, 60, 120, 5));
}

TEST(ProxyModel, ClampedToUnitInterval) {
  RandomStream rng(2);
  for (int t = 0; t < 2000; ++t) {
    const ProxyFeatures f{rng.uniform(5, 11), rng.uniform(1, 50), 1 + static_cast<int>(rng.below(1000))};
    const double e = proxy_error(f, rng.uniform(0.01, 120), 120, rng.next_u64());
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
}

}  // namespace
}  // namespace nago
