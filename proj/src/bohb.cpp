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

#include "nago/bohb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "nago/error.hpp"

namespace nago {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void BudgetSchedule::validate() const {
  if (budgets.empty()) throw ParameterError("budget schedule needs at least one budget");
  if (!(eta > 1.0)) throw ParameterError("eta must be greater than 1");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0) || !std::isfinite(budgets[i])) throw ParameterError("budgets must be positive");
    if (i > 0) {
      const double expected = budgets[i - 1] * eta;
      if (std::abs(budgets[i] - expected) > 1e-6 * expected) {
        throw ParameterError("consecutive budgets must differ by a factor of eta");
      }
    }
  }
}

BudgetSchedule BudgetSchedule::geometric(double min_budget, double max_budget, double eta) {
  if (!(min_budget > 0.0) || !(max_budget >= min_budget) || !(eta > 1.0)) {
    throw ParameterError("geometric schedule needs 0 < min <= max and eta > 1");
  }
  BudgetSchedule s;
  s.eta = eta;
  s.budgets.clear();
  const int rungs = static_cast<int>(std::floor(std::log(max_budget / min_budget) / std::log(eta) + 1e-9)) + 1;
  for (int i = rungs - 1; i >= 0; --i) s.budgets.push_back(max_budget / std::pow(eta, i));
  return s;
}

double BracketPlan::cost() const {
  double total = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i) total += configs[i] * budgets[i];
  return total;
}

BracketPlan plan_bracket(const BudgetSchedule& schedule, int iteration) {
  schedule.validate();
  if (iteration < 0) throw ParameterError("bracket iteration must be nonnegative");
  const int r = schedule.rungs();
  BracketPlan plan;
  plan.s = r - 1 - (iteration % r);
  int n = (r / (plan.s + 1)) * static_cast<int>(std::lround(std::pow(schedule.eta, plan.s)));
  n = std::max(1, n);
  for (int rung = r - 1 - plan.s; rung < r; ++rung) {
    plan.configs.push_back(n);
    plan.budgets.push_back(schedule.budgets[rung]);
    n = std::max(1, static_cast<int>(std::ceil(n / schedule.eta - 1e-12)));
  }
  return plan;
}

void KdeConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  if (!(min_bandwidth > 0.0)) throw ParameterError("min_bandwidth must be positive");
  if (candidates < 1) throw ParameterError("need at least one KDE candidate");
  if (!(random_fraction >= 0.0 && random_fraction <= 1.0)) throw ParameterError("random_fraction must lie in [0, 1]");
  if (!(bandwidth_factor > 0.0)) throw ParameterError("bandwidth_factor must be positive");
}

ProductKde::ProductKde(std::vector<std::vector<double>> points, double min_bandwidth) : points_(std::move(points)) {
  if (points_.empty()) throw InsufficientDataError("KDE needs at least one point");
  const std::size_t d = points_.front().size();
  const auto n = static_cast<double>(points_.size());
  bandwidths_.assign(d, min_bandwidth);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& p : points_) mean += p[j];
    mean /= n;
    double var = 0.0;
    for (const auto& p : points_) var += (p[j] - mean) * (p[j] - mean);
    var = points_.size() > 1 ? var / (n - 1.0) : 0.0;
    const double h = 1.06 * std::sqrt(var) * std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
    bandwidths_[j] = std::max(min_bandwidth, h);
  }
}

double ProductKde::log_density(std::span<const double> x) const {
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi);
  std::vector<double> terms;
  terms.reserve(points_.size());
  for (const auto& p : points_) {
    double t = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double z = (x[j] - p[j]) / bandwidths_[j];
      t += log_norm - std::log(bandwidths_[j]) - 0.5 * z * z;
    }
    terms.push_back(t);
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc / static_cast<double>(terms.size()));
}

std::vector<double> ProductKde::sample(RandomStream& rng, double factor) const {
  const auto& center = points_[rng.below(points_.size())];
  std::vector<double> x(center.size());
  for (std::size_t j = 0; j < center.size(); ++j) {
    const double sd = bandwidths_[j] * factor;
    double v = center[j];
    bool accepted = false;
    for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
      v = center[j] + sd * rng.normal();
      accepted = v >= 0.0 && v <= 1.0;
    }
    x[j] = accepted ? v : std::clamp(v, 0.0, 1.0);
  }
  return x;
}

std::optional<KdeModelPair> build_kde_models(std::span<const Observation> observations, std::size_t dimension,
                                             const KdeConfig& config, double budget) {
  const std::size_t min_points = config.min_points > 0 ? static_cast<std::size_t>(config.min_points) : dimension + 1;
  const std::size_t n = observations.size();
  const std::size_t n_good =
      std::max(min_points, static_cast<std::size_t>(std::floor(config.gamma * static_cast<double>(n))));
  if (n < n_good + min_points) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return observations[a].loss < observations[b].loss; });
  std::vector<std::vector<double>> good;
  std::vector<std::vector<double>> bad;
  for (std::size_t i = 0; i < n; ++i) (i < n_good ? good : bad).push_back(observations[order[i]].x);
  return KdeModelPair{ProductKde(std::move(good), config.min_bandwidth), ProductKde(std::move(bad), config.min_bandwidth),
                      budget};
}

std::vector<double> suggest(const std::optional<KdeModelPair>& models, std::size_t dimension, const KdeConfig& config,
                            RandomStream& rng, bool* from_model) {
  config.validate();
  const bool random = !models || rng.uniform() < config.random_fraction;
  if (from_model) *from_model = !random;
  if (random) {
    std::vector<double> x(dimension);
    for (auto& v : x) v = rng.uniform();
    return x;
  }
  std::vector<double> best;
  double best_score = -kInf;
  for (int c = 0; c < config.candidates; ++c) {
    auto x = models->good.sample(rng, config.bandwidth_factor);
    const double score = models->good.log_density(x) - models->bad.log_density(x);
    if (best.empty() || score > best_score) {
      best_score = score;
      best = std::move(x);
    }
  }
  return best;
}

json to_json(const Trial& t) {
  json objectives = json::object();
  for (const auto& [k, v] : t.objectives) objectives[k] = v;
  json doc = {{"id", t.id},
              {"config_id", t.config_id},
              {"bracket", t.bracket},
              {"rung", t.rung},
              {"budget", t.budget},
              {"unit", t.unit},
              {"native", t.native},
              {"theta", t.theta},
              {"seed", t.seed},
              {"from_model", t.from_model},
              {"status", t.status == TrialStatus::Ok ? "ok" : "failed"},
              {"objectives", objectives},
              {"message", t.message}};
  doc["objective"] = std::isfinite(t.objective) ? json(t.objective) : json(nullptr);
  return doc;
}

Trial trial_from_json(const json& doc) {
  try {
    Trial t;
    t.id = doc.at("id").get<int>();
    t.config_id = doc.value("config_id", t.id);
    t.bracket = doc.value("bracket", 0);
    t.rung = doc.value("rung", 0);
    t.budget = doc.at("budget").get<double>();
    t.unit = doc.value("unit", std::vector<double>{});
    t.native = doc.value("native", std::vector<double>{});
    t.theta = doc.value("theta", json::object());
    t.seed = doc.value("seed", std::uint64_t{0});
    t.from_model = doc.value("from_model", false);
    t.status = doc.value("status", std::string("ok")) == "ok" ? TrialStatus::Ok : TrialStatus::Failed;
    t.objective = doc.contains("objective") && !doc.at("objective").is_null() ? doc.at("objective").get<double>() : kInf;
    if (doc.contains("objectives")) {
      for (const auto& [k, v] : doc.at("objectives").items()) {
        if (!v.is_null()) t.objectives[k] = v.get<double>();
      }
    }
    t.message = doc.value("message", std::string());
    return t;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("trial record: ") + e.what());
  }
}

std::vector<std::size_t> promote(std::span<const Trial> rung, double eta) {
  if (rung.empty()) throw ParameterError("cannot promote from an empty rung");
  if (!(eta > 1.0)) throw ParameterError("eta must be greater than 1");
  std::vector<std::size_t> order(rung.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rung[a].objective != rung[b].objective) return rung[a].objective < rung[b].objective;
    return rung[a].id < rung[b].id;
  });
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rung.size() / eta - 1e-12)));
  order.resize(std::min(keep, order.size()));
  return order;
}

BohbResult run_bohb(const SearchProblem& problem, Evaluator& evaluator, const BohbConfig& config,
                    const std::function<void(const Trial&)>& on_trial) {
  config.schedule.validate();
  config.kde.validate();
  if (config.iterations < 0) throw ParameterError("iterations must be nonnegative");
  const std::size_t d = problem.domain.dimension();
  const RandomStream root(config.seed);
  std::vector<std::vector<Observation>> observations(config.schedule.budgets.size());
  BohbResult result;
  int next_trial = 0;
  int next_config = 0;

  auto current_model = [&]() -> std::optional<KdeModelPair> {
    for (std::size_t b = observations.size(); b-- > 0;) {
      auto m = build_kde_models(observations[b], d, config.kde, config.schedule.budgets[b]);
      if (m) return m;
    }
    return std::nullopt;
  };

  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    const BracketPlan plan = plan_bracket(config.schedule, iteration);
    const int first_rung = config.schedule.rungs() - 1 - plan.s;
    RandomStream rng = root.split({1, static_cast<std::uint64_t>(iteration)});

    struct Config {
      int id;
      std::vector<double> unit;
      bool from_model;
    };
    std::vector<Config> configs;
    const auto model = current_model();
    for (int c = 0; c < plan.configs.front(); ++c) {
      bool from_model = false;
      auto x = suggest(model, d, config.kde, rng, &from_model);
      configs.push_back({next_config++, std::move(x), from_model});
    }

    for (std::size_t stage = 0; stage < plan.configs.size(); ++stage) {
      const int rung_index = first_rung + static_cast<int>(stage);
      const double budget = plan.budgets[stage];
      std::vector<EvalRequest> requests;
      std::vector<Trial> trials;
      for (const auto& cfg : configs) {
        Trial t;
        t.id = next_trial++;
        t.config_id = cfg.id;
        t.bracket = iteration;
        t.rung = rung_index;
        t.budget = budget;
        t.unit = cfg.unit;
        t.native = problem.domain.to_native(cfg.unit);
        t.seed = root.derive_seed({2, static_cast<std::uint64_t>(t.id)});
        t.from_model = cfg.from_model;
        requests.push_back(problem.make_request("t" + std::to_string(t.id), cfg.unit, budget, t.seed));
        t.theta = requests.back().theta;
        trials.push_back(std::move(t));
      }
      const auto responses = evaluator.evaluate_batch(requests);
      for (std::size_t i = 0; i < trials.size(); ++i) {
        auto& t = trials[i];
        const auto& r = responses[i];
        t.objectives = r.objectives;
        t.message = r.message;
        const auto it = r.objectives.find(config.objective);
        if (r.ok() && it != r.objectives.end() && std::isfinite(it->second)) {
          t.status = TrialStatus::Ok;
          t.objective = it->second;
        } else {
          t.status = TrialStatus::Failed;
          t.objective = kInf;
          if (t.message.empty()) t.message = "objective '" + config.objective + "' missing";
        }
        observations[static_cast<std::size_t>(rung_index)].push_back({t.unit, t.objective});
        result.total_cost += t.budget;
        result.history.push_back(t);
        if (on_trial) on_trial(t);
      }
      if (stage + 1 == plan.configs.size()) break;
      const auto survivors = promote(trials, config.schedule.eta);
      std::vector<Config> next;
      for (std::size_t idx : survivors) {
        const auto pos = std::find_if(configs.begin(), configs.end(),
                                      [&](const Config& c) { return c.id == trials[idx].config_id; });
        next.push_back(*pos);
      }
      next.resize(std::min<std::size_t>(next.size(), static_cast<std::size_t>(plan.configs[stage + 1])));
      configs = std::move(next);
    }
  }

  for (const auto& t : result.history) {
    if (t.status != TrialStatus::Ok) continue;
    if (!result.best || t.budget > result.best->budget ||
        (t.budget == result.best->budget && t.objective < result.best->objective)) {
      result.best = t;
    }
  }
  return result;
}

}  // namespace nago
