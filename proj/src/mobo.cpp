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

#include "nago/mobo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "nago/error.hpp"
#include "nago/parallel.hpp"
#include "nago/random.hpp"

namespace nago {

using nlohmann::json;

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("objective vectors differ in length");
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strictly = true;
  }
  return strictly;
}

std::vector<std::size_t> pareto_filter(std::span<const std::vector<double>> points) {
  // Sorting lexicographically means only earlier points can dominate later
  // ones, so each point is checked against the current front only.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    bool dominated = false;
    for (std::size_t j : front) {
      if (dominates(points[j], points[i])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

namespace {

std::vector<std::vector<double>> inside_reference(std::span<const std::vector<double>> points,
                                                  std::span<const double> reference) {
  std::vector<std::vector<double>> out;
  for (const auto& p : points) {
    if (p.size() != reference.size()) throw ParameterError("point and reference differ in length");
    bool inside = true;
    for (std::size_t k = 0; k < p.size(); ++k) inside = inside && p[k] < reference[k];
    if (inside) out.push_back(p);
  }
  return out;
}

}  // namespace

double hypervolume_2d(std::span<const std::vector<double>> points, std::span<const double> reference) {
  if (reference.size() != 2) throw ParameterError("hypervolume_2d needs two objectives");
  auto pts = inside_reference(points, reference);
  std::sort(pts.begin(), pts.end());
  double volume = 0.0;
  double ceiling = reference[1];
  for (const auto& p : pts) {
    if (p[1] < ceiling) {
      volume += (reference[0] - p[0]) * (ceiling - p[1]);
      ceiling = p[1];
    }
  }
  return volume;
}

double hypervolume_monte_carlo(std::span<const std::vector<double>> points, std::span<const double> reference,
                               int samples, std::uint64_t seed) {
  if (samples < 1) throw ParameterError("Monte Carlo hypervolume needs at least one sample");
  const auto pts = inside_reference(points, reference);
  if (pts.empty()) return 0.0;
  const std::size_t d = reference.size();
  std::vector<double> lo(reference.begin(), reference.end());
  for (const auto& p : pts) {
    for (std::size_t k = 0; k < d; ++k) lo[k] = std::min(lo[k], p[k]);
  }
  double box = 1.0;
  for (std::size_t k = 0; k < d; ++k) box *= reference[k] - lo[k];
  RandomStream rng(seed);
  std::vector<double> u(d);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < d; ++k) u[k] = rng.uniform(lo[k], reference[k]);
    for (const auto& p : pts) {
      bool covers = true;
      for (std::size_t k = 0; k < d && covers; ++k) covers = p[k] <= u[k];
      if (covers) {
        ++hits;
        break;
      }
    }
  }
  return box * static_cast<double>(hits) / samples;
}

double hypervolume(std::span<const std::vector<double>> points, std::span<const double> reference, int mc_samples,
                   std::uint64_t seed) {
  switch (reference.size()) {
    case 1: {
      double best = reference[0];
      for (const auto& p : inside_reference(points, reference)) best = std::min(best, p[0]);
      return reference[0] - best;
    }
    case 2:
      return hypervolume_2d(points, reference);
    case 3:
      return hypervolume_monte_carlo(points, reference, mc_samples, seed);
    default:
      throw ParameterError("hypervolume supports one to three objectives");
  }
}

bool ParetoArchive::insert(ArchiveEntry entry) {
  for (const auto& e : entries_) {
    if (e.objectives == entry.objectives || dominates(e.objectives, entry.objectives)) return false;
  }
  std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(entry.objectives, e.objectives); });
  entries_.push_back(std::move(entry));
  return true;
}

std::vector<std::vector<double>> ParetoArchive::objective_vectors() const {
  std::vector<std::vector<double>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.objectives);
  return out;
}

double ParetoArchive::hypervolume(std::span<const double> reference) const {
  return nago::hypervolume(objective_vectors(), reference);
}

double local_penalizer(std::span<const double> x, std::span<const double> anchor, double lipschitz, double mean,
                       double best, double sigma) {
  if (x.size() != anchor.size()) throw ParameterError("penalizer points differ in length");
  double dist2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) dist2 += (x[j] - anchor[j]) * (x[j] - anchor[j]);
  const double numerator = lipschitz * std::sqrt(dist2);
  const double denominator = std::abs(mean - best) + sigma;
  if (numerator <= 0.0) return 0.0;
  if (!(denominator > 0.0)) return 1.0;
  return std::min(numerator / denominator, 1.0);
}

double penalty(const PenalizedCandidate& c, const PenalizerState& state) {
  double product = 1.0;
  for (const auto& anchor : state.anchors) {
    for (std::size_t k = 0; k < state.lipschitz.size(); ++k) {
      product *= local_penalizer(c.x, anchor, state.lipschitz[k], c.mean[k], state.best[k], c.sd[k]);
      if (product == 0.0) return 0.0;
    }
  }
  return product;
}

BatchSelection select_batch(std::span<const PenalizedCandidate> candidates, PenalizerState& state, int batch) {
  if (batch < 1) throw ParameterError("batch size must be at least 1");
  for (const auto& c : candidates) {
    if (c.mean.size() != state.lipschitz.size() || c.sd.size() != state.lipschitz.size() ||
        state.best.size() != state.lipschitz.size()) {
      throw ParameterError("candidate and penalizer objective counts differ");
    }
  }
  BatchSelection selection;
  std::vector<bool> taken(candidates.size(), false);
  auto is_anchor = [&](const PenalizedCandidate& c) {
    return std::any_of(state.anchors.begin(), state.anchors.end(), [&](const auto& a) { return a == c.x; });
  };
  while (static_cast<int>(selection.indices.size()) < batch) {
    std::size_t best = candidates.size();
    double best_value = 0.0;
    std::size_t fallback = candidates.size();
    double fallback_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i] || is_anchor(candidates[i])) continue;
      const double value = candidates[i].score * penalty(candidates[i], state);
      if (value > best_value) {
        best_value = value;
        best = i;
      }
      if (candidates[i].score > fallback_value) {
        fallback_value = candidates[i].score;
        fallback = i;
      }
    }
    if (best == candidates.size()) {
      if (fallback == candidates.size()) break;
      best = fallback;
      ++selection.fallbacks;
    }
    taken[best] = true;
    selection.indices.push_back(best);
    state.anchors.push_back(candidates[best].x);
  }
  return selection;
}

double estimate_lipschitz(const std::function<std::vector<double>(std::span<const std::vector<double>>)>& mean,
                          std::span<const std::vector<double>> points, double floor, double step) {
  if (points.empty()) return floor;
  const std::size_t d = points.front().size();
  std::vector<std::vector<double>> probes;
  probes.reserve(points.size() * 2 * d);
  std::vector<double> spans;
  for (const auto& p : points) {
    for (std::size_t j = 0; j < d; ++j) {
      auto lo = p;
      auto hi = p;
      lo[j] = std::max(0.0, p[j] - step);
      hi[j] = std::min(1.0, p[j] + step);
      spans.push_back(hi[j] - lo[j]);
      probes.push_back(std::move(lo));
      probes.push_back(std::move(hi));
    }
  }
  const auto values = mean(probes);
  double best = floor;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t q = i * d + j;
      const double g = (values[2 * q + 1] - values[2 * q]) / spans[q];
      norm2 += g * g;
    }
    best = std::max(best, std::sqrt(norm2));
  }
  return best;
}

namespace {

struct DataPoint {
  std::vector<double> unit;
  std::vector<double> objectives;
};

std::optional<DataPoint> usable(const Trial& t, const SearchProblem& problem) {
  if (t.status != TrialStatus::Ok) return std::nullopt;
  DataPoint p;
  const std::size_t d = problem.domain.dimension();
  if (t.unit.size() == d) {
    p.unit = t.unit;
  } else if (t.native.size() == d) {
    p.unit = problem.domain.to_unit(t.native);
  } else {
    return std::nullopt;
  }
  for (const auto& name : problem.objectives) {
    const auto it = t.objectives.find(name);
    if (it == t.objectives.end() || !std::isfinite(it->second)) return std::nullopt;
    p.objectives.push_back(it->second);
  }
  return p;
}

}  // namespace

MoboResult run_mobo(const SearchProblem& problem, Evaluator& evaluator, const MoboConfig& config,
                    std::span<const Trial> init, const std::function<void(const Trial&)>& on_trial,
                    const std::function<void(int, const ParetoArchive&)>& on_iteration) {
  if (config.iterations < 0 || config.batch < 1 || config.candidates < 1) {
    throw ParameterError("MOBO needs iterations >= 0, batch >= 1 and candidates >= 1");
  }
  if (problem.objectives.empty()) throw ParameterError("MOBO needs at least one objective");
  const std::size_t m = problem.objectives.size();
  const RandomStream root(config.seed);
  const bool track_hv = config.reference.size() == m && m <= 3;

  MoboResult result;
  std::vector<DataPoint> data;
  int next_trial = 0;

  auto record = [&](const std::vector<std::vector<double>>& units, int iteration) {
    std::vector<EvalRequest> requests;
    std::vector<Trial> trials;
    for (std::size_t b = 0; b < units.size(); ++b) {
      Trial t;
      t.id = next_trial++;
      t.config_id = t.id;
      t.bracket = iteration;
      t.rung = static_cast<int>(b);
      t.budget = config.budget;
      t.unit = units[b];
      t.native = problem.domain.to_native(units[b]);
      t.seed = root.derive_seed({2, static_cast<std::uint64_t>(t.id)});
      requests.push_back(problem.make_request("m" + std::to_string(t.id), t.unit, t.budget, t.seed));
      t.theta = requests.back().theta;
      trials.push_back(std::move(t));
    }
    const auto responses = evaluator.evaluate_batch(requests);
    for (std::size_t b = 0; b < trials.size(); ++b) {
      auto& t = trials[b];
      t.objectives = responses[b].objectives;
      t.message = responses[b].message;
      t.status = responses[b].ok() ? TrialStatus::Ok : TrialStatus::Failed;
      const auto first = t.objectives.find(problem.objectives.front());
      t.objective = first != t.objectives.end() ? first->second : std::numeric_limits<double>::infinity();
      if (auto p = usable(t, problem)) {
        data.push_back(*p);
        result.archive.insert({t.id, p->unit, t.theta, p->objectives});
      } else {
        t.status = TrialStatus::Failed;
        t.objective = std::numeric_limits<double>::infinity();
        if (t.message.empty()) t.message = "missing objectives";
      }
      result.history.push_back(t);
      if (on_trial) on_trial(t);
    }
  };

  std::vector<DataPoint> seeded;
  for (const auto& t : init) {
    if (auto p = usable(t, problem)) seeded.push_back(*p);
  }
  if (static_cast<int>(seeded.size()) > config.init_limit) {
    seeded.erase(seeded.begin(), seeded.end() - config.init_limit);
  }
  for (const auto& p : seeded) {
    data.push_back(p);
    result.archive.insert({-1, p.unit, problem.domain.theta_json(problem.domain.to_native(p.unit)), p.objectives});
  }
  if (data.empty()) {
    RandomStream rng = root.split({1});
    std::vector<std::vector<double>> units(static_cast<std::size_t>(std::max(config.init_random, 3)));
    for (auto& u : units) u = problem.domain.sample_unit(rng);
    record(units, 0);
  }
  if (track_hv) result.hypervolume_trace.push_back(result.archive.hypervolume(config.reference));
  if (on_iteration) on_iteration(0, result.archive);

  for (int it = 1; it <= config.iterations; ++it) {
    if (data.size() < 3) throw InsufficientDataError("MOBO needs at least three successful evaluations to fit");
    std::vector<BnnEnsemble> models(m);
    parallel_for(m, config.threads, [&](std::size_t k) {
      SurrogateDataset ds;
      for (const auto& p : data) {
        ds.inputs.push_back(p.unit);
        ds.targets.push_back(p.objectives[k]);
      }
      SghmcConfig sc = config.surrogate;
      sc.noise = NoiseModel::Heteroscedastic;
      sc.seed = root.derive_seed({3, static_cast<std::uint64_t>(it), k});
      models[k] = fit_bnn(ds, sc);
    });

    RandomStream rng = root.split({4, static_cast<std::uint64_t>(it)});
    std::vector<std::vector<double>> pool;
    pool.reserve(static_cast<std::size_t>(config.candidates));
    const auto& archive = result.archive.entries();
    const int uniform = archive.empty() ? config.candidates : config.candidates - config.candidates / 2;
    for (int c = 0; c < uniform; ++c) pool.push_back(problem.domain.sample_unit(rng));
    while (static_cast<int>(pool.size()) < config.candidates) {
      auto x = archive[rng.below(archive.size())].unit;
      for (auto& v : x) v = std::clamp(v + config.mutation_sd * rng.normal(), 0.0, 1.0);
      pool.push_back(std::move(x));
    }

    std::vector<std::vector<SurrogatePosterior>> post(m);
    parallel_for(m, config.threads, [&](std::size_t k) { post[k] = models[k].predict_batch(pool); });
    std::vector<std::vector<double>> bounds(pool.size(), std::vector<double>(m));
    std::vector<PenalizedCandidate> scored(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      auto& c = scored[i];
      c.x = pool[i];
      for (std::size_t k = 0; k < m; ++k) {
        const double sd = post[k][i].stddev();
        bounds[i][k] = post[k][i].mean - config.beta * sd;
        c.mean.push_back(post[k][i].mean);
        c.sd.push_back(sd);
        c.score += sd / models[k].target_scale();
      }
    }
    const auto front = pareto_filter(bounds);

    PenalizerState state;
    std::vector<std::vector<double>> probes(static_cast<std::size_t>(config.lipschitz_points));
    for (auto& p : probes) p = problem.domain.sample_unit(rng);
    for (std::size_t k = 0; k < m; ++k) {
      state.lipschitz.push_back(estimate_lipschitz(
          [&](std::span<const std::vector<double>> xs) { return models[k].predict_mean_batch(xs); }, probes,
          config.lipschitz_floor));
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : data) best = std::min(best, p.objectives[k]);
      state.best.push_back(best);
    }

    std::vector<PenalizedCandidate> front_candidates;
    for (std::size_t i : front) front_candidates.push_back(scored[i]);
    auto pick = select_batch(front_candidates, state, config.batch);
    result.fallbacks += pick.fallbacks;
    std::vector<std::vector<double>> units;
    for (std::size_t i : pick.indices) units.push_back(front_candidates[i].x);
    if (static_cast<int>(units.size()) < config.batch) {
      auto rest = select_batch(scored, state, config.batch - static_cast<int>(units.size()));
      result.fallbacks += rest.fallbacks;
      for (std::size_t i : rest.indices) units.push_back(scored[i].x);
    }
    record(units, it);
    if (track_hv) result.hypervolume_trace.push_back(result.archive.hypervolume(config.reference));
    if (on_iteration) on_iteration(it, result.archive);
  }
  return result;
}

}  // namespace nago
