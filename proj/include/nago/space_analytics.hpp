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

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "nago/cost_model.hpp"

namespace nago {

using BigInt = boost::multiprecision::cpp_int;

// Maximum node counts per level and operation alphabet size.
struct CardinalityParams {
  int n_o_max = 10;
  int n_c_max = 10;
  int n_s_max = 10;
  int m = 5;

  void validate() const;
};

// Number of distinct DAGs counted per level is 2^(n(n+1)/2); the bottom level
// also chooses one of m operations per node:
//   T = (sum_{n=3..N_O} 2^phi(n)) * (sum_{n=1..N_C} 2^phi(n)) * (sum_{n=3..N_S} 2^phi(n) m^n)
// Merge-strategy variations are not counted, so this is a lower bound.
BigInt hnag_cardinality(const CardinalityParams& params);

// 8 candidate operations on each of 14 cell edges.
BigInt darts_cardinality();

// "4.58e56" style rendering with the given number of significant digits
// (rounded half up on the exact decimal expansion).
std::string scientific(const BigInt& value, int significant_digits = 3);

// Edges among n nodes when every ordered pair may be wired: n(n-1)/2.
std::int64_t possible_connections(int n);

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending bin boundaries
  std::vector<std::int64_t> counts;
};

// Freedman-Diaconis bin count, at least 1. Degenerate samples (one value or
// zero spread) give one bin.
int freedman_diaconis_bins(std::span<const double> values);

// bins <= 0 selects the Freedman-Diaconis rule. The last bin is closed.
Histogram make_histogram(std::span<const double> values, int bins = 0);

// Header: bin_lo,bin_hi,count
std::string histogram_csv(const Histogram& histogram);

enum class SpaceKind { Hnag, Rnag };

SpaceKind space_kind_from_string(const std::string& name);
std::string to_string(SpaceKind kind);

struct SpaceSampleOptions {
  SpaceKind space = SpaceKind::Hnag;
  std::int64_t param_budget = 4'000'000;
  MemoryOptions memory;
  CostOptions cost;
  int threads = 0;  // 0: hardware concurrency
};

struct ArchitectureSample {
  nlohmann::json theta;
  std::uint64_t seed = 0;
  CostReport cost;
  int compute_nodes = 0;
  double mean_path_length = 0.0;
};

// Draws `count` generator vectors uniformly from the search ranges, samples
// one architecture per vector and prices it. Sample i depends only on
// (seed, i), so the result does not depend on the thread count.
std::vector<ArchitectureSample> sample_space(int count, std::uint64_t seed, const SpaceSampleOptions& options);

struct MemoryHistogram {
  std::vector<ArchitectureSample> samples;
  Histogram histogram;  // over memory_mb
};

MemoryHistogram memory_histogram(int sample_count, std::uint64_t seed, const SpaceSampleOptions& options,
                                 int bins = 0);

// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation with average-rank ties (Pearson correlation of
// the ranks). Throws InsufficientDataError with fewer than two pairs and
// ParameterError on non-finite input. Returns 0 when either side is constant.
double rank_correlation(std::span<const std::pair<double, double>> pairs);

struct StudyRow {
  std::size_t theta_index = 0;
  nlohmann::json theta;
  int draws = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_memory_mb = 0.0;
  double std_memory_mb = 0.0;
  double mean_time_proxy = 0.0;
  double std_time_proxy = 0.0;
};

// Random-sample study: theta_count uniform generator vectors, draws_per_theta
// architectures each. The error column is the noise-free proxy pseudo-error
// at full budget. Standard deviations are population (divide by n).
std::vector<StudyRow> sample_study(int theta_count, int draws_per_theta, std::uint64_t seed,
                                   const SpaceSampleOptions& options);

// Header: theta_index,draws,mean_error,std_error,mean_memory_mb,std_memory_mb,mean_time_proxy,std_time_proxy,theta
std::string study_csv(std::span<const StudyRow> rows);

}  // namespace nago
