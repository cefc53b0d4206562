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
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace nago {

enum class NoiseModel { Homoscedastic, Heteroscedastic };

std::string to_string(NoiseModel noise);
NoiseModel noise_model_from_string(const std::string& name);

// Sampler and network settings. The defaults are the pinned values shipped in
// config/sghmc_default.json.
struct SghmcConfig {
  NoiseModel noise = NoiseModel::Heteroscedastic;
  int hidden_layers = 3;
  int hidden_units = 10;
  double step_size = 1e-2;
  double momentum_decay = 5e-2;
  int batch_size = 32;            // minibatch is min(|D|, batch_size)
  int burn_in_per_point = 5;      // burn-in steps = burn_in_per_point * |D|
  int sampling_steps = 1000;
  int keep_every = 10;
  double prior_scale = 1.0;       // N(0, prior_scale^2) on every weight
  double noise_floor = 1e-6;      // added after softplus
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SghmcConfig&) const = default;
};

nlohmann::json to_json(const SghmcConfig& config);
SghmcConfig sghmc_config_from_json(const nlohmann::json& doc);

struct FitSchedule {
  int burn_in_steps = 0;
  int sampling_steps = 0;
  int keep_every = 1;
  int minibatch = 0;
  // 1-based step numbers within the sampling phase whose weights are kept.
  std::vector<int> retained_steps;
};

FitSchedule fit_schedule(std::size_t dataset_size, const SghmcConfig& config);

// Inputs are expected in [0, 1]^d (see SearchDomain::to_unit). Targets are
// standardized internally and the affine map is undone at prediction time.
struct SurrogateDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::size_t dimension() const { return inputs.empty() ? 0 : inputs.front().size(); }
  void validate() const;
};

struct SurrogatePosterior {
  double mean = 0.0;
  double variance = 0.0;
  int sample_count = 0;

  double stddev() const;
};

// Smallest reported variance; keeps NLL finite when every term vanishes.
inline constexpr double kVarianceFloor = 1e-12;

// Ensemble moments. mu = mean(f); variance = mean((f - mu)^2) + mean(w_n^2),
// which equals mean(f^2) - mu^2 + mean(w_n^2) without the cancellation.
SurrogatePosterior combine_homoscedastic(std::span<const double> f, double noise_sd);
SurrogatePosterior combine_homoscedastic(std::span<const double> f, std::span<const double> noise_sd);
SurrogatePosterior combine_heteroscedastic(std::span<const double> f, std::span<const double> noise_sd);

// Mean Gaussian negative log likelihood and root-mean-square error.
double gaussian_nll(std::span<const SurrogatePosterior> posteriors, std::span<const double> targets);
double rmse(std::span<const SurrogatePosterior> posteriors, std::span<const double> targets);

// Frozen ensemble of retained weight samples. Immutable after fit and safe to
// query from many threads.
class BnnEnsemble {
 public:
  struct SampleOutput {
    double f = 0.0;         // in target units
    double noise_sd = 0.0;  // in target units, > 0
  };

  BnnEnsemble() = default;

  NoiseModel noise() const { return config_.noise; }
  const SghmcConfig& config() const { return config_; }
  int input_dim() const { return input_dim_; }
  std::size_t sample_count() const { return samples_.size(); }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }

  std::vector<SampleOutput> evaluate(std::span<const double> x) const;
  // Posterior under the ensemble's own noise model.
  SurrogatePosterior predict(std::span<const double> x) const;
  SurrogatePosterior predict_homoscedastic(std::span<const double> x) const;
  SurrogatePosterior predict_heteroscedastic(std::span<const double> x) const;
  // Mean of f only; cheaper than predict.
  double predict_mean(std::span<const double> x) const;
  std::vector<SurrogatePosterior> predict_many(std::span<const std::vector<double>> xs, int threads = 1) const;
  // predict() for every point (equal up to rounding), one matrix product per
  // weight sample.
  std::vector<SurrogatePosterior> predict_batch(std::span<const std::vector<double>> xs) const;
  std::vector<double> predict_mean_batch(std::span<const std::vector<double>> xs) const;

  const std::vector<Eigen::VectorXd>& samples() const { return samples_; }

  nlohmann::json to_json() const;
  static BnnEnsemble from_json(const nlohmann::json& doc);

  friend BnnEnsemble fit_bnn(const SurrogateDataset& data, const SghmcConfig& config);

  bool operator==(const BnnEnsemble& other) const;

 private:
  SghmcConfig config_;
  int input_dim_ = 0;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  std::vector<Eigen::VectorXd> samples_;
};

// Runs SGHMC on the negative log posterior of the network and keeps
// sampling_steps / keep_every weight samples. Deterministic given the seed.
// Throws InsufficientDataError when |D| < 3.
BnnEnsemble fit_bnn(const SurrogateDataset& data, const SghmcConfig& config);

}  // namespace nago
