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

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nago/architecture.hpp"

namespace nago::testing {

inline nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(std::string(NAGO_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

struct IrCase {
  std::string name;
  ArchitectureIR ir;
  std::int64_t params_bare = 0;     // no norm terms, no classifier head
  std::int64_t params_default = 0;  // default bookkeeping, 10 classes
  std::int64_t memory_bytes = 0;    // 32x32 input, 4 bytes
  std::int64_t flops = 0;           // 32x32 input, 10 classes
  double mean_path_length = 0.0;
};

inline std::vector<IrCase> small_irs() {
  std::vector<IrCase> out;
  const auto doc = load_fixture("small_irs.json");
  for (const auto& c : doc.at("cases")) {
    out.push_back({c.at("name"), ir_from_json(c.at("ir")), c.at("params_bare"), c.at("params_default"),
                   c.at("memory_bytes"), c.at("flops"), c.at("mean_path_length")});
  }
  return out;
}

}  // namespace nago::testing
