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

#include "nago/random.hpp"
#include "nago/error.hpp"
#include "nago/generator.hpp"
#include "nago/search_domain.hpp"

namespace nago {
namespace {

TEST(SearchBlocks, Parse) {
  EXPECT_EQ(parse_search_blocks("graph"), kSearchGraphOnly);
  EXPECT_EQ(parse_search_blocks("merge-op"), kSearchMerge | kSearchOps);
  EXPECT_EQ(parse_search_blocks("stage-channel"), kSearchStages | kSearchChannels);
  EXPECT_EQ(parse_search_blocks("graph+merge+op+stage+channel"),
            kSearchMerge | kSearchOps | kSearchStages | kSearchChannels);
  EXPECT_THROW(parse_search_blocks("graph+wings"), ParameterError);
  for (unsigned b : {0u, 3u, 12u, 15u, 5u}) EXPECT_EQ(parse_search_blocks(search_blocks_name(b)), b);
}

TEST(SearchDomain, HnagGraphDimensions) {
  const auto d = SearchDomain::hnag();
  ASSERT_EQ(d.dimension(), 8u);
  const auto& dims = d.dimensions();
  EXPECT_EQ(dims[0], (Dimension{"N_t", 3, 10, true}));
  EXPECT_EQ(dims[1], (Dimension{"K_t", 2, 5, true}));
  EXPECT_EQ(dims[2], (Dimension{"P_t", 0.1, 0.9, false}));
  EXPECT_EQ(dims[3], (Dimension{"N_m", 1, 10, true}));
  EXPECT_EQ(dims[5], (Dimension{"N_b", 3, 10, true}));
}

TEST(SearchDomain, ExpandedDimensions) {
  EXPECT_EQ(SearchDomain::hnag(kSearchMerge | kSearchOps).dimension(), 16u);
  EXPECT_EQ(SearchDomain::hnag(kSearchStages | kSearchChannels).dimension(), 14u);
  EXPECT_EQ(SearchDomain::hnag(15).dimension(), 22u);
  EXPECT_EQ(SearchDomain::rnag().dimension(), 9u);
}

TEST(SearchDomain, IntegerCellsAreEqualWidth) {
  const auto d = SearchDomain::hnag();
  // N_t has 8 values over [0, 1].
  std::vector<double> u(8, 0.5);
  for (int v = 0; v < 8; ++v) {
    u[0] = (v + 0.01) / 8.0;
    EXPECT_EQ(d.to_native(u)[0], 3 + v);
    u[0] = (v + 0.99) / 8.0;
    EXPECT_EQ(d.to_native(u)[0], 3 + v);
  }
  u[0] = 1.0;
  EXPECT_EQ(d.to_native(u)[0], 10);
}

TEST(SearchDomain, UnitRoundTrip) {
  RandomStream rng(4);
  for (const auto& d : {SearchDomain::hnag(), SearchDomain::hnag(15), SearchDomain::rnag()}) {
    for (int t = 0; t < 200; ++t) {
      const auto u = d.sample_unit(rng);
      const auto native = d.to_native(u);
      const auto back = d.to_native(d.to_unit(native));
      for (std::size_t i = 0; i < native.size(); ++i) {
        const auto& dim = d.dimensions()[i];
        if (dim.integer) {
          EXPECT_EQ(back[i], native[i]);
        } else {
          EXPECT_NEAR(back[i], native[i], 1e-12 * (dim.hi - dim.lo));
        }
        EXPECT_GE(native[i], dim.lo);
        EXPECT_LE(native[i], dim.hi);
        if (dim.integer) EXPECT_EQ(native[i], std::floor(native[i]));
      }
    }
  }
}

TEST(SearchDomain, ThetaJsonIsValidGenerator) {
  RandomStream rng(8);
  const auto d = SearchDomain::hnag(15);
  for (int t = 0; t < 200; ++t) {
    const auto theta = hnag_theta_from_json(d.theta_json(d.to_native(d.sample_unit(rng))));
    EXPECT_NO_THROW(theta.validate());
    EXPECT_LT(theta.top.k, theta.top.n);
    EXPECT_LT(theta.bottom.k, theta.bottom.n);
  }
}

TEST(SearchDomain, GraphOnlyKeepsDefaultBlocks) {
  const auto d = SearchDomain::hnag();
  const std::vector<double> native{6, 4, 0.8, 1, 0.1, 3, 2, 0.5};
  const auto theta = hnag_theta_from_json(d.theta_json(native));
  EXPECT_EQ(theta.top, (WsParams{6, 4, 0.8}));
  EXPECT_EQ(theta.mid, (ErParams{1, 0.1}));
  EXPECT_EQ(theta.bottom, (WsParams{3, 2, 0.5}));
  EXPECT_EQ(theta.op_weights, GeneratorHyperparams{}.op_weights);
}

TEST(SearchDomain, KClampedToNodeCount) {
  const auto d = SearchDomain::hnag();
  const std::vector<double> native{3, 5, 0.5, 2, 0.5, 4, 5, 0.5};
  const auto theta = hnag_theta_from_json(d.theta_json(native));
  EXPECT_EQ(theta.top.k, 2);
  EXPECT_EQ(theta.bottom.k, 3);
}

TEST(SearchDomain, RnagTheta) {
  const auto d = SearchDomain::rnag();
  RandomStream rng(1);
  const auto theta = rnag_theta_from_json(d.theta_json(d.to_native(d.sample_unit(rng))));
  EXPECT_NO_THROW(theta.validate_search_ranges());
}

TEST(SearchDomain, UnitBoxTheta) {
  const auto d = SearchDomain::unit_box(3);
  const std::vector<double> x{0.1, 0.2, 0.3};
  EXPECT_EQ(d.to_native(x), x);
  EXPECT_EQ(d.theta_json(x).at("x").get<std::vector<double>>(), x);
  EXPECT_THROW(SearchDomain::unit_box(0), ParameterError);
}

TEST(SearchDomain, JsonRoundTrip) {
  for (const auto& d : {SearchDomain::hnag(), SearchDomain::hnag(kSearchMerge), SearchDomain::rnag(),
                        SearchDomain::unit_box(4)}) {
    EXPECT_EQ(SearchDomain::from_json(d.to_json()), d);
  }
}

TEST(SearchDomain, RejectsWrongLength) {
  const auto d = SearchDomain::hnag();
  EXPECT_THROW(d.to_native(std::vector<double>{0.5}), ParameterError);
}

}  // namespace
}  // namespace nago
