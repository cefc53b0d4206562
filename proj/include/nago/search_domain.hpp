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
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nago/random.hpp"

namespace nago {

struct Dimension {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  bool integer = false;

  bool operator==(const Dimension&) const = default;
};

// Optional HNAG blocks searched on top of the eight graph hyperparameters.
enum SearchBlock : unsigned {
  kSearchGraphOnly = 0,
  kSearchMerge = 1u << 0,
  kSearchOps = 1u << 1,
  kSearchStages = 1u << 2,
  kSearchChannels = 1u << 3,
};

// Parses "graph", "merge-op", "stage-channel" or a '+'-joined list of
// blocks such as "graph+merge+op".
unsigned parse_search_blocks(std::string_view spec);
std::string search_blocks_name(unsigned blocks);

// Box-shaped search domain. Optimizers work on the unit cube; the domain maps
// unit points to native coordinates and, for generator spaces, into theta
// documents.
//
// Integer coordinates are a continuous relaxation: the unit interval is cut
// into (hi - lo + 1) equal cells, one per integer value.
class SearchDomain {
 public:
  static SearchDomain hnag(unsigned blocks = kSearchGraphOnly);
  static SearchDomain rnag();
  static SearchDomain unit_box(int dimension);

  const std::string& space() const { return space_; }
  unsigned blocks() const { return blocks_; }
  std::size_t dimension() const { return dims_.size(); }
  const std::vector<Dimension>& dimensions() const { return dims_; }

  std::vector<double> to_native(std::span<const double> unit) const;
  std::vector<double> to_unit(std::span<const double> native) const;
  std::vector<double> sample_unit(RandomStream& rng) const;

  // Theta document for generator spaces ("hnag" / "rnag"); an object holding
  // the raw point for unit boxes. K is clamped to N - 1 when the sampled
  // ring degree would not fit the graph.
  nlohmann::json theta_json(std::span<const double> native) const;

  nlohmann::json to_json() const;
  static SearchDomain from_json(const nlohmann::json& doc);

  bool operator==(const SearchDomain&) const = default;

 private:
  std::string space_;
  unsigned blocks_ = 0;
  std::vector<Dimension> dims_;
};

}  // namespace nago
