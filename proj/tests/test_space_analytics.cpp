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

#include <algorithm>
#include <cmath>

#include "nago/random.hpp"
#include "nago/error.hpp"
#include "nago/space_analytics.hpp"

namespace nago {
namespace {

// Independent evaluation of the three level sums with phi(n) = n(n+1)/2.
BigInt cardinality_oracle(int o, int c, int s, int m) {
  auto two_to = [](int n) { return BigInt(1) << (n * (n + 1) / 2); };
  BigInt top = 0, mid = 0, bottom = 0;
  for (int n = 3; n <= o; ++n) top += two_to(n);
  for (int n = 1; n <= c; ++n) mid += two_to(n);
  for (int n = 3; n <= s; ++n) {
    BigInt ops = 1;
    for (int i = 0; i < n; ++i) ops *= m;
    bottom += two_to(n) * ops;
  }
  return top * mid * bottom;
}

TEST(Cardinality, DefaultSetting) {
  const BigInt t = hnag_cardinality({10, 10, 10, 5});
  EXPECT_EQ(t.str(), "457702890423305960075472584481972000594976438654080000000");
  EXPECT_EQ(t, cardinality_oracle(10, 10, 10, 5));
  EXPECT_EQ(scientific(t), "4.58e56");
}

TEST(Cardinality, SmallestSetting) {
  // Each level only admits its minimum graph: 2^6 * 2^1 * 2^6 * 1^3.
  EXPECT_EQ(hnag_cardinality({3, 1, 3, 1}), BigInt(8192));
  EXPECT_EQ(hnag_cardinality({3, 3, 3, 1}), BigInt(64 * (2 + 8 + 64) * 64));
}

TEST(Cardinality, MatchesOracleOnGrid) {
  for (int o = 3; o <= 6; ++o) {
    for (int c = 1; c <= 4; ++c) {
      for (int s = 3; s <= 6; ++s) {
        for (int m = 1; m <= 5; m += 2) EXPECT_EQ(hnag_cardinality({o, c, s, m}), cardinality_oracle(o, c, s, m));
      }
    }
  }
}

TEST(Cardinality, RejectsBadParameters) {
  EXPECT_THROW(hnag_cardinality({2, 1, 3, 1}), ParameterError);
  EXPECT_THROW(hnag_cardinality({3, 0, 3, 1}), ParameterError);
  EXPECT_THROW(hnag_cardinality({3, 1, 3, 0}), ParameterError);
}

TEST(Cardinality, Darts) {
  const BigInt d = darts_cardinality();
  EXPECT_EQ(d, BigInt(4'398'046'511'104LL));
  EXPECT_EQ(d % 8, 0);
  BigInt x = d;
  int log8 = 0;
  while (x > 1) {
    ASSERT_EQ(x % 8, 0);
    x /= 8;
    ++log8;
  }
  EXPECT_EQ(log8, 14);
  EXPECT_EQ(scientific(d), "4.40e12");
}

TEST(Scientific, RoundsHalfUp) {
  EXPECT_EQ(scientific(BigInt(12345)), "1.23e4");
  EXPECT_EQ(scientific(BigInt(12350)), "1.24e4");
  EXPECT_EQ(scientific(BigInt(99960)), "1.00e5");
  EXPECT_EQ(scientific(BigInt(7)), "7.00e0");
  EXPECT_EQ(scientific(BigInt(123456), 5), "1.2346e5");
}

TEST(PossibleConnections, Examples) {
  EXPECT_EQ(possible_connections(32), 496);
  EXPECT_EQ(possible_connections(8) * 4 + possible_connections(4), 118);
}

TEST(Histogram, SingleSample) {
  const std::vector<double> v{3.5};
  const auto h = make_histogram(v);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts[0], 1);
  EXPECT_LT(h.edges[0], 3.5);
  EXPECT_GT(h.edges[1], 3.5);
}

TEST(Histogram, FreedmanDiaconisMatchesReference) {
  // IQR with linear interpolation: 11.25 - 2.25 = 9, width 18 / cbrt(10),
  // range 19, so 3 bins.
  const std::vector<double> v{1, 2, 2, 3, 4, 7, 9, 12, 13, 20};
  EXPECT_EQ(freedman_diaconis_bins(v), 3);
  const auto h = make_histogram(v);
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{6, 3, 1}));
  EXPECT_DOUBLE_EQ(h.edges.front(), 1.0);
  EXPECT_DOUBLE_EQ(h.edges.back(), 20.0);
}

TEST(Histogram, SturgesWhenIqrVanishes) {
  std::vector<double> v(20, 1.0);
  v.back() = 2.0;
  EXPECT_EQ(freedman_diaconis_bins(v), static_cast<int>(std::ceil(std::log2(20.0))) + 1);
}

TEST(Histogram, CountsSumToSamples) {
  RandomStream rng(1);
  std::vector<double> v(997);
  for (auto& x : v) x = rng.normal();
  const auto h = make_histogram(v, 13);
  std::int64_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 997);
  EXPECT_EQ(h.edges.size(), 14u);
}

TEST(Histogram, Csv) {
  const std::vector<double> v{0, 1, 2, 3};
  const std::string csv = histogram_csv(make_histogram(v, 2));
  EXPECT_EQ(csv, "bin_lo,bin_hi,count\n0,1.5,2\n1.5,3,2\n");
}

TEST(Histogram, RejectsBadInput) {
  EXPECT_THROW(make_histogram(std::vector<double>{}), InsufficientDataError);
  EXPECT_THROW(make_histogram(std::vector<double>{1, NAN}), ParameterError);
}

TEST(RankCorrelation, Extremes) {
  const std::vector<std::pair<double, double>> same{{1, 10}, {2, 20}, {3, 35}, {4, 90}};
  EXPECT_DOUBLE_EQ(rank_correlation(same), 1.0);
  const std::vector<std::pair<double, double>> reversed{{1, 4}, {2, 3}, {3, 2}, {4, 1}};
  EXPECT_DOUBLE_EQ(rank_correlation(reversed), -1.0);
}

TEST(RankCorrelation, HandExample) {
  // Ranks (1,2),(2,1),(3,3): 1 - 6 * 2 / (3 * 8) = 0.5.
  const std::vector<std::pair<double, double>> p{{1, 2}, {2, 1}, {3, 3}};
  EXPECT_NEAR(rank_correlation(p), 0.5, 1e-15);
}

TEST(RankCorrelation, TiesUseAverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5, 3}), (std::vector<double>{3.5, 1, 3.5, 2}));
  const std::vector<std::pair<double, double>> constant{{1, 2}, {2, 2}, {3, 2}};
  EXPECT_EQ(rank_correlation(constant), 0.0);
}

TEST(RankCorrelation, Errors) {
  EXPECT_THROW(rank_correlation(std::vector<std::pair<double, double>>{{1, 2}}), InsufficientDataError);
  EXPECT_THROW(rank_correlation(std::vector<std::pair<double, double>>{{1, 2}, {INFINITY, 1}}), ParameterError);
}

TEST(SampleSpace, DeterministicAndThreadIndependent) {
  SpaceSampleOptions one;
  one.threads = 1;
  SpaceSampleOptions many = one;
  many.threads = 4;
  const auto a = sample_space(20, 5, one);
  const auto b = sample_space(20, 5, many);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].theta, b[i].theta);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].cost.param_count, b[i].cost.param_count);
    EXPECT_EQ(a[i].cost.memory_bytes, b[i].cost.memory_bytes);
    EXPECT_LE(a[i].cost.param_count, one.param_budget);
  }
}

TEST(SampleSpace, RnagSamples) {
  SpaceSampleOptions opts;
  opts.space = SpaceKind::Rnag;
  for (const auto& s : sample_space(5, 2, opts)) {
    EXPECT_GE(s.compute_nodes, 30);
    EXPECT_LE(s.compute_nodes, 120);
  }
}

TEST(MemoryHistogram, SameSeedSameBytes) {
  SpaceSampleOptions opts;
  const auto a = memory_histogram(30, 9, opts);
  const auto b = memory_histogram(30, 9, opts);
  EXPECT_EQ(histogram_csv(a.histogram), histogram_csv(b.histogram));
  std::int64_t total = 0;
  for (auto c : a.histogram.counts) total += c;
  EXPECT_EQ(total, 30);
}

TEST(SampleStudy, RowsAndMoments) {
  SpaceSampleOptions opts;
  const auto rows = sample_study(6, 4, 3, opts);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].theta_index, i);
    EXPECT_EQ(rows[i].draws, 4);
    EXPECT_GT(rows[i].mean_memory_mb, 0.0);
    EXPECT_GE(rows[i].std_memory_mb, 0.0);
    EXPECT_GT(rows[i].mean_error, 0.0);
  }
  const std::string csv = study_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("theta_index"), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(SpaceKind, Strings) {
  EXPECT_EQ(space_kind_from_string("rnag"), SpaceKind::Rnag);
  EXPECT_EQ(to_string(SpaceKind::Hnag), "hnag");
  EXPECT_THROW(space_kind_from_string("darts"), ParameterError);
}

}  // namespace
}  // namespace nago
