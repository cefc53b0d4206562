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

#include "nago/search_domain.hpp"

#include <algorithm>
#include <cmath>

#include "nago/error.hpp"
#include "nago/generator.hpp"

namespace nago {

using nlohmann::json;

unsigned parse_search_blocks(std::string_view spec) {
  if (spec == "graph" || spec.empty()) return kSearchGraphOnly;
  if (spec == "merge-op") return kSearchMerge | kSearchOps;
  if (spec == "stage-channel") return kSearchStages | kSearchChannels;
  unsigned blocks = 0;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t end = std::min(spec.find('+', start), spec.size());
    const auto part = spec.substr(start, end - start);
    if (part == "graph") {
    } else if (part == "merge") {
      blocks |= kSearchMerge;
    } else if (part == "op" || part == "ops") {
      blocks |= kSearchOps;
    } else if (part == "stage" || part == "stages") {
      blocks |= kSearchStages;
    } else if (part == "channel" || part == "channels") {
      blocks |= kSearchChannels;
    } else {
      throw ParameterError("unknown search block '" + std::string(part) + "'");
    }
    start = end + 1;
  }
  return blocks;
}

std::string search_blocks_name(unsigned blocks) {
  std::string name = "graph";
  if (blocks & kSearchMerge) name += "+merge";
  if (blocks & kSearchOps) name += "+op";
  if (blocks & kSearchStages) name += "+stage";
  if (blocks & kSearchChannels) name += "+channel";
  return name;
}

SearchDomain SearchDomain::hnag(unsigned blocks) {
  SearchDomain d;
  d.space_ = "hnag";
  d.blocks_ = blocks;
  d.dims_ = {{"N_t", 3, 10, true}, {"K_t", 2, 5, true},   {"P_t", 0.1, 0.9, false}, {"N_m", 1, 10, true},
             {"P_m", 0.1, 0.9, false}, {"N_b", 3, 10, true}, {"K_b", 2, 5, true},    {"P_b", 0.1, 0.9, false}};
  if (blocks & kSearchMerge) {
    for (const char* n : {"M_weighted_sum", "M_attention", "M_concat"}) d.dims_.push_back({n, 0.0, 1.0, false});
  }
  if (blocks & kSearchOps) {
    for (const char* n : {"op_conv1x1", "op_conv3x3", "op_conv5x5", "op_pool3x3", "op_pool5x5"}) {
      d.dims_.push_back({n, 0.0, 1.0, false});
    }
  }
  if (blocks & kSearchStages) {
    for (const char* n : {"S_1", "S_2", "S_3"}) d.dims_.push_back({n, 0.1, 1.0, false});
  }
  if (blocks & kSearchChannels) {
    for (const char* n : {"C_1", "C_2", "C_3"}) d.dims_.push_back({n, 1.0, 4.0, false});
  }
  return d;
}

SearchDomain SearchDomain::rnag() {
  SearchDomain d;
  d.space_ = "rnag";
  for (int s = 1; s <= 3; ++s) {
    const auto suffix = std::to_string(s);
    d.dims_.push_back({"N_" + suffix, 10, 40, true});
    d.dims_.push_back({"K_" + suffix, 2, 9, true});
    d.dims_.push_back({"P_" + suffix, 0.1, 0.9, false});
  }
  return d;
}

SearchDomain SearchDomain::unit_box(int dimension) {
  if (dimension < 1) throw ParameterError("unit box needs at least one dimension");
  SearchDomain d;
  d.space_ = "box";
  for (int i = 0; i < dimension; ++i) d.dims_.push_back({"x" + std::to_string(i), 0.0, 1.0, false});
  return d;
}

std::vector<double> SearchDomain::to_native(std::span<const double> unit) const {
  if (unit.size() != dims_.size()) throw ParameterError("point has the wrong dimension for this search domain");
  std::vector<double> out(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    if (d.integer) {
      const double cells = d.hi - d.lo + 1.0;
      out[i] = std::min(d.hi, d.lo + std::floor(u * cells));
    } else {
      out[i] = d.lo + u * (d.hi - d.lo);
    }
  }
  return out;
}

std::vector<double> SearchDomain::to_unit(std::span<const double> native) const {
  if (native.size() != dims_.size()) throw ParameterError("point has the wrong dimension for this search domain");
  std::vector<double> out(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (d.integer) {
      out[i] = (std::round(native[i]) - d.lo + 0.5) / (d.hi - d.lo + 1.0);
    } else {
      out[i] = d.hi > d.lo ? (native[i] - d.lo) / (d.hi - d.lo) : 0.0;
    }
    out[i] = std::clamp(out[i], 0.0, 1.0);
  }
  return out;
}

std::vector<double> SearchDomain::sample_unit(RandomStream& rng) const {
  std::vector<double> out(dims_.size());
  for (auto& v : out) v = rng.uniform();
  return out;
}

namespace {

std::vector<double> normalized(std::span<const double> raw) {
  double total = 0.0;
  for (double v : raw) total += v;
  std::vector<double> out(raw.begin(), raw.end());
  for (auto& v : out) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(raw.size());
  return out;
}

int as_int(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

json SearchDomain::theta_json(std::span<const double> native) const {
  if (native.size() != dims_.size()) throw ParameterError("point has the wrong dimension for this search domain");
  if (space_ == "box") return json{{"x", std::vector<double>(native.begin(), native.end())}};
  if (space_ == "rnag") {
    RnagHyperparams theta;
    for (int s = 0; s < 3; ++s) {
      const int n = as_int(native[3 * s]);
      theta.stages[s] = WsParams{n, std::min(as_int(native[3 * s + 1]), n - 1), native[3 * s + 2]};
    }
    return nago::to_json(theta);
  }
  GeneratorHyperparams theta;
  theta.top = WsParams{as_int(native[0]), std::min(as_int(native[1]), as_int(native[0]) - 1), native[2]};
  theta.mid = ErParams{as_int(native[3]), native[4]};
  theta.bottom = WsParams{as_int(native[5]), std::min(as_int(native[6]), as_int(native[5]) - 1), native[7]};
  std::size_t next = 8;
  auto take = [&](std::size_t count) {
    std::span<const double> part = native.subspan(next, count);
    next += count;
    return normalized(part);
  };
  if (blocks_ & kSearchMerge) {
    const auto w = take(3);
    std::copy(w.begin(), w.end(), theta.merge_weights.begin());
  }
  if (blocks_ & kSearchOps) {
    const auto w = take(5);
    std::copy(w.begin(), w.end(), theta.op_weights.begin());
  }
  if (blocks_ & kSearchStages) theta.stage_ratio = take(3);
  if (blocks_ & kSearchChannels) {
    theta.channel_ratio.assign(native.begin() + static_cast<std::ptrdiff_t>(next),
                               native.begin() + static_cast<std::ptrdiff_t>(next + 3));
    next += 3;
  }
  return nago::to_json(theta);
}

json SearchDomain::to_json() const {
  json dims = json::array();
  for (const auto& d : dims_) dims.push_back({{"name", d.name}, {"lo", d.lo}, {"hi", d.hi}, {"integer", d.integer}});
  return json{{"space", space_}, {"blocks", search_blocks_name(blocks_)}, {"dimensions", dims}};
}

SearchDomain SearchDomain::from_json(const json& doc) {
  try {
    const auto space = doc.at("space").get<std::string>();
    if (space == "hnag") return hnag(parse_search_blocks(doc.value("blocks", std::string("graph"))));
    if (space == "rnag") return rnag();
    if (space == "box") return unit_box(static_cast<int>(doc.at("dimensions").size()));
    throw ProtocolError("unknown search space '" + space + "'");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("search domain document: ") + e.what());
  }
}

}  // namespace nago
