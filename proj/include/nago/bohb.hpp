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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nago/eval_bridge.hpp"
#include "nago/random.hpp"

namespace nago {

struct BudgetSchedule {
  std::vector<double> budgets{30.0, 60.0, 120.0};
  double eta = 2.0;

  // budgets ascending and positive, eta > 1, and consecutive rungs related by
  // eta within 1e-6 relative. A single rung is allowed and degenerates to
  // plain model-based search at that budget.
  void validate() const;
  int rungs() const { return static_cast<int>(budgets.size()); }
  double max_budget() const { return budgets.back(); }

  static BudgetSchedule geometric(double min_budget, double max_budget, double eta);
};

// Successive-halving bracket. Bracket s starts at rung R - 1 - s with
// floor(R / (s + 1)) * eta^s configurations; every later rung keeps
// ceil(n / eta) of the previous one.
struct BracketPlan {
  int s = 0;
  std::vector<int> configs;
  std::vector<double> budgets;

  double cost() const;
};

// Brackets cycle s = R-1, R-2, ..., 0, R-1, ... over iterations.
BracketPlan plan_bracket(const BudgetSchedule& schedule, int iteration);

struct Observation {
  std::vector<double> x;  // unit cube
  double loss = 0.0;      // +inf for failed trials
};

struct KdeConfig {
  double gamma = 0.15;
  double min_bandwidth = 1e-3;
  int candidates = 24;
  double random_fraction = 1.0 / 3.0;
  double bandwidth_factor = 3.0;  // kernel widening while drawing candidates
  int min_points = 0;             // 0 means d + 1

  void validate() const;
};

// Product Gaussian KDE on [0, 1]^d with per-dimension normal-reference
// bandwidths 1.06 * sd * n^(-1 / (d + 4)), floored at min_bandwidth.
class ProductKde {
 public:
  ProductKde(std::vector<std::vector<double>> points, double min_bandwidth);

  double log_density(std::span<const double> x) const;
  // A kernel centered on a random data point, widened by factor, truncated
  // to the unit cube.
  std::vector<double> sample(RandomStream& rng, double factor) const;

  const std::vector<double>& bandwidths() const { return bandwidths_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<std::vector<double>> points_;
  std::vector<double> bandwidths_;
};

// Good/bad density pair: the max(min_points, floor(gamma * n)) lowest-loss
// points form the good KDE and the rest the bad KDE. No model is built unless
// both sides hold at least min_points observations.
struct KdeModelPair {
  ProductKde good;
  ProductKde bad;
  double budget = 0.0;
};

std::optional<KdeModelPair> build_kde_models(std::span<const Observation> observations, std::size_t dimension,
                                             const KdeConfig& config, double budget = 0.0);

// A unit-cube configuration. With probability random_fraction, or without a
// model, the draw is uniform; otherwise the candidate maximizing
// good/bad density among `candidates` draws from the widened good KDE, ties
// to the first.
std::vector<double> suggest(const std::optional<KdeModelPair>& models, std::size_t dimension,
                            const KdeConfig& config, RandomStream& rng, bool* from_model = nullptr);

enum class TrialStatus { Ok, Failed };

struct Trial {
  int id = 0;
  int config_id = 0;
  int bracket = 0;  // iteration index
  int rung = 0;
  double budget = 0.0;
  std::vector<double> unit;
  std::vector<double> native;  // integers already rounded
  nlohmann::json theta;
  std::uint64_t seed = 0;
  bool from_model = false;
  TrialStatus status = TrialStatus::Ok;
  double objective = 0.0;  // +inf when failed
  std::map<std::string, double> objectives;
  std::string message;
};

nlohmann::json to_json(const Trial& trial);
Trial trial_from_json(const nlohmann::json& doc);

// ceil(|rung| / eta) lowest-objective trials, ties broken by trial id.
// Returns indices into `rung`, best first.
std::vector<std::size_t> promote(std::span<const Trial> rung, double eta);

struct BohbConfig {
  BudgetSchedule schedule;
  int iterations = 60;
  KdeConfig kde;
  std::uint64_t seed = 0;
  std::string objective = kValError;
};

struct BohbResult {
  std::vector<Trial> history;
  std::optional<Trial> best;  // best ok trial at the highest budget reached
  double total_cost = 0.0;    // sum of evaluated budgets
};

// Hyperband brackets with KDE-driven sampling. Configurations for a rung are
// evaluated as one batch. `on_trial` sees every finished trial in history
// order.
BohbResult run_bohb(const SearchProblem& problem, Evaluator& evaluator, const BohbConfig& config,
                    const std::function<void(const Trial&)>& on_trial = {});

}  // namespace nago
