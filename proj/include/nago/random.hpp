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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

namespace nago {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a, used to turn string tags into stream keys.
std::uint64_t hash_string(std::string_view text);

// Counter-based random stream.
//
// The i-th output of a stream with key K is mix64(K + (i + 1) * gamma), so a
// stream is fully described by (key, counter) and children obtained through
// split() are independent of how many values the parent has already drawn.
// All distribution helpers are implemented here rather than with <random>
// distributions, whose algorithms differ between standard libraries; this
// keeps sampled architectures byte-identical across toolchains.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal (Box-Muller, one value per call).
  double normal();

  // Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights);

  // Child stream keyed by a sequence of tags. Does not advance this stream.
  RandomStream split(std::initializer_list<std::uint64_t> tags) const;
  RandomStream split(std::string_view tag) const;

  // A 64-bit seed for the child stream; passing it to RandomStream(seed)
  // reproduces split(tags).
  std::uint64_t derive_seed(std::initializer_list<std::uint64_t> tags) const;

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nago
