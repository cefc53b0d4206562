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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nago/bnn_surrogate.hpp"
#include "nago/bohb.hpp"
#include "nago/eval_bridge.hpp"

namespace nago {

// a dominates b: a_k <= b_k for every k and a_k < b_k for some k (all
// objectives minimized).
bool dominates(std::span<const double> a, std::span<const double> b);

// Indices of the points no other point dominates, in input order. Equal
// points do not dominate each other, so duplicates survive together.
std::vector<std::size_t> pareto_filter(std::span<const std::vector<double>> points);

// Volume dominated by `points` inside the box bounded above by `reference`.
// A point with any coordinate >= the reference contributes nothing (points on
// the boundary add zero volume). Exact sweep for two objectives, exact for
// one, Monte Carlo with `mc_samples` draws for three.
double hypervolume(std::span<const std::vector<double>> points, std::span<const double> reference,
                   int mc_samples = 200'000, std::uint64_t seed = 0);
double hypervolume_2d(std::span<const std::vector<double>> points, std::span<const double> reference);
double hypervolume_monte_carlo(std::span<const std::vector<double>> points, std::span<const double> reference,
                               int samples, std::uint64_t seed);

struct ArchiveEntry {
  int trial_id = -1;
  std::vector<double> unit;
  nlohmann::json theta;
  std::vector<double> objectives;
};

// Nondominated set. Insertion rejects points dominated by, or equal to, a
// member and evicts members the new point dominates.
class ParetoArchive {
 public:
  bool insert(ArchiveEntry entry);

  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<std::vector<double>> objective_vectors() const;
  double hypervolume(std::span<const double> reference) const;

 private:
  std::vector<ArchiveEntry> entries_;
};

// Hard local penalizer min{ L * |x - anchor| / (|mu - M| + sigma), 1 }.
// Zero at the anchor; a zero denominator away from the anchor gives 1.
double local_penalizer(std::span<const double> x, std::span<const double> anchor, double lipschitz, double mean,
                       double best, double sigma);

struct PenalizedCandidate {
  std::vector<double> x;
  double score = 0.0;         // acquisition to maximize, >= 0
  std::vector<double> mean;   // per objective
  std::vector<double> sd;     // per objective
};

struct PenalizerState {
  std::vector<double> lipschitz;  // per objective, > 0
  std::vector<double> best;       // per objective
  std::vector<std::vector<double>> anchors;
};

// Product of local_penalizer over every anchor and objective.
double penalty(const PenalizedCandidate& candidate, const PenalizerState& state);

struct BatchSelection {
  std::vector<std::size_t> indices;
  int fallbacks = 0;  // picks made after every remaining score was suppressed
};

// Greedy batch: repeatedly take the candidate maximizing score * penalty,
// then add it as an anchor. Candidates equal to an anchor are never taken.
// When every remaining penalized score is zero the best unpenalized score is
// used instead. Returns fewer than `batch` indices only when the candidates
// run out. `state.anchors` is extended with the selected points.
BatchSelection select_batch(std::span<const PenalizedCandidate> candidates, PenalizerState& state, int batch);

// Max finite-difference gradient norm of `mean` over the given points,
// floored at `floor`.
double estimate_lipschitz(const std::function<std::vector<double>(std::span<const std::vector<double>>)>& mean,
                          std::span<const std::vector<double>> points, double floor = 1e-3, double step = 1e-4);

struct MoboConfig {
  int iterations = 30;
  int batch = 8;
  int candidates = 2000;
  double beta = 2.0;
  double mutation_sd = 0.05;
  int lipschitz_points = 256;
  double lipschitz_floor = 1e-3;
  int init_random = 8;     // used only when no init data is given
  int init_limit = 50;     // most recent usable init trials
  double budget = 60.0;    // fixed training budget per evaluation
  SghmcConfig surrogate;   // noise model forced to heteroscedastic
  std::vector<double> reference;  // optional, for the hypervolume trace
  std::uint64_t seed = 0;
  int threads = 0;
};

struct MoboResult {
  std::vector<Trial> history;
  ParetoArchive archive;
  std::vector<double> hypervolume_trace;  // after init and after each iteration
  int fallbacks = 0;
};

// Batch multi-objective BO. Every iteration fits one heteroscedastic BNN per
// objective, scores a candidate pool with lower confidence bounds
// mu - beta * sigma, keeps the candidates whose bound vectors are Pareto
// optimal, and fills the batch by penalized greedy maximization of the summed
// standardized posterior standard deviation. Failed evaluations stay in the
// history but never enter the archive or the surrogate data.
MoboResult run_mobo(const SearchProblem& problem, Evaluator& evaluator, const MoboConfig& config,
                    std::span<const Trial> init = {}, const std::function<void(const Trial&)>& on_trial = {},
                    const std::function<void(int, const ParetoArchive&)>& on_iteration = {});

}  // namespace nago
