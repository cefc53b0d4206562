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

#include "nago/bnn_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nago/error.hpp"
#include "nago/parallel.hpp"
#include "nago/random.hpp"

namespace nago {

using nlohmann::json;

std::string to_string(NoiseModel noise) {
  return noise == NoiseModel::Homoscedastic ? "homoscedastic" : "heteroscedastic";
}

NoiseModel noise_model_from_string(const std::string& name) {
  if (name == "homoscedastic" || name == "hom") return NoiseModel::Homoscedastic;
  if (name == "heteroscedastic" || name == "het") return NoiseModel::Heteroscedastic;
  throw ParameterError("unknown noise model '" + name + "'");
}

void SghmcConfig::validate() const {
  if (hidden_layers < 1 || hidden_units < 1) throw ParameterError("network needs at least one hidden unit and layer");
  if (!(step_size > 0.0) || !(momentum_decay > 0.0) || momentum_decay >= 1.0) {
    throw ParameterError("SGHMC needs step_size > 0 and momentum_decay in (0, 1)");
  }
  if (batch_size < 1 || burn_in_per_point < 0 || sampling_steps < 1 || keep_every < 1 ||
      keep_every > sampling_steps) {
    throw ParameterError("invalid SGHMC schedule");
  }
  if (!(prior_scale > 0.0) || !(noise_floor > 0.0)) throw ParameterError("prior_scale and noise_floor must be > 0");
}

json to_json(const SghmcConfig& c) {
  return {{"noise", to_string(c.noise)},
          {"hidden_layers", c.hidden_layers},
          {"hidden_units", c.hidden_units},
          {"step_size", c.step_size},
          {"momentum_decay", c.momentum_decay},
          {"batch_size", c.batch_size},
          {"burn_in_per_point", c.burn_in_per_point},
          {"sampling_steps", c.sampling_steps},
          {"keep_every", c.keep_every},
          {"prior_scale", c.prior_scale},
          {"noise_floor", c.noise_floor},
          {"seed", c.seed}};
}

SghmcConfig sghmc_config_from_json(const json& doc) {
  try {
    SghmcConfig c;
    if (doc.contains("noise")) c.noise = noise_model_from_string(doc.at("noise").get<std::string>());
    c.hidden_layers = doc.value("hidden_layers", c.hidden_layers);
    c.hidden_units = doc.value("hidden_units", c.hidden_units);
    c.step_size = doc.value("step_size", c.step_size);
    c.momentum_decay = doc.value("momentum_decay", c.momentum_decay);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.burn_in_per_point = doc.value("burn_in_per_point", c.burn_in_per_point);
    c.sampling_steps = doc.value("sampling_steps", c.sampling_steps);
    c.keep_every = doc.value("keep_every", c.keep_every);
    c.prior_scale = doc.value("prior_scale", c.prior_scale);
    c.noise_floor = doc.value("noise_floor", c.noise_floor);
    c.seed = doc.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("SGHMC config: ") + e.what());
  }
}

FitSchedule fit_schedule(std::size_t n, const SghmcConfig& config) {
  config.validate();
  FitSchedule s;
  s.burn_in_steps = config.burn_in_per_point * static_cast<int>(n);
  s.sampling_steps = config.sampling_steps;
  s.keep_every = config.keep_every;
  s.minibatch = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(config.batch_size)));
  for (int t = config.keep_every; t <= config.sampling_steps; t += config.keep_every) s.retained_steps.push_back(t);
  return s;
}

void SurrogateDataset::validate() const {
  if (inputs.size() != targets.size()) throw ParameterError("dataset inputs and targets differ in length");
  const std::size_t d = dimension();
  for (const auto& x : inputs) {
    if (x.size() != d || d == 0) throw ParameterError("dataset inputs must share one nonzero dimension");
    for (double v : x) {
      if (!std::isfinite(v)) throw ParameterError("dataset inputs must be finite");
    }
  }
  for (double y : targets) {
    if (!std::isfinite(y)) throw ParameterError("dataset targets must be finite");
  }
}

double SurrogatePosterior::stddev() const { return std::sqrt(std::max(0.0, variance)); }

namespace {

SurrogatePosterior combine(std::span<const double> f, std::span<const double> noise_sd) {
  if (f.empty()) throw ParameterError("posterior needs at least one weight sample");
  if (noise_sd.size() != f.size()) throw ParameterError("noise and mean samples differ in length");
  const auto n = static_cast<double>(f.size());
  double mu = 0.0;
  for (double v : f) mu += v;
  mu /= n;
  double spread = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    spread += (f[i] - mu) * (f[i] - mu);
    noise += noise_sd[i] * noise_sd[i];
  }
  SurrogatePosterior p;
  p.mean = mu;
  p.variance = std::max(kVarianceFloor, spread / n + noise / n);
  p.sample_count = static_cast<int>(f.size());
  return p;
}

}  // namespace

SurrogatePosterior combine_homoscedastic(std::span<const double> f, double noise_sd) {
  std::vector<double> w(f.size(), noise_sd);
  return combine(f, w);
}

SurrogatePosterior combine_homoscedastic(std::span<const double> f, std::span<const double> noise_sd) {
  return combine(f, noise_sd);
}

SurrogatePosterior combine_heteroscedastic(std::span<const double> f, std::span<const double> noise_sd) {
  return combine(f, noise_sd);
}

double gaussian_nll(std::span<const SurrogatePosterior> posteriors, std::span<const double> targets) {
  if (posteriors.size() != targets.size()) throw ParameterError("nll: posteriors and targets differ in length");
  if (targets.empty()) throw InsufficientDataError("nll needs at least one point");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double var = std::max(kVarianceFloor, posteriors[i].variance);
    const double r = targets[i] - posteriors[i].mean;
    total += 0.5 * std::log(2.0 * std::numbers::pi * var) + r * r / (2.0 * var);
  }
  return total / static_cast<double>(targets.size());
}

double rmse(std::span<const SurrogatePosterior> posteriors, std::span<const double> targets) {
  if (posteriors.size() != targets.size()) throw ParameterError("rmse: posteriors and targets differ in length");
  if (targets.empty()) throw InsufficientDataError("rmse needs at least one point");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = targets[i] - posteriors[i].mean;
    total += r * r;
  }
  return std::sqrt(total / static_cast<double>(targets.size()));
}

namespace {

double softplus(double s) { return s > 30.0 ? s : std::log1p(std::exp(s)); }
double sigmoid(double s) { return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

// Flat parameter layout: for each layer W (out x in, column-major) then b.
// The homoscedastic model appends one raw noise parameter.
struct Network {
  std::vector<int> sizes;
  bool heteroscedastic = true;
  double noise_floor = 1e-6;

  Network(int input_dim, const SghmcConfig& c) : heteroscedastic(c.noise == NoiseModel::Heteroscedastic) {
    sizes.push_back(input_dim);
    for (int l = 0; l < c.hidden_layers; ++l) sizes.push_back(c.hidden_units);
    sizes.push_back(heteroscedastic ? 2 : 1);
    noise_floor = c.noise_floor;
  }

  std::size_t layer_count() const { return sizes.size() - 1; }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) n += sizes[l + 1] * sizes[l] + sizes[l + 1];
    return n + (heteroscedastic ? 0 : 1);
  }

  Eigen::VectorXd initialize(RandomStream& rng) const {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(parameter_count());
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const int in = sizes[l];
      const int out = sizes[l + 1];
      const double limit = std::sqrt(6.0 / (in + out));
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(in) * out; ++i) theta[offset + i] = rng.uniform(-limit, limit);
      offset += static_cast<Eigen::Index>(in) * out + out;
    }
    // Start the noise head near one standard deviation of the targets.
    const double unit = std::log(std::expm1(1.0));
    if (heteroscedastic) {
      theta[offset - 1] = unit;
    } else {
      theta[offset] = unit;
    }
    return theta;
  }

  // Output rows: f, and the raw noise pre-activation for the het model.
  Eigen::MatrixXd forward(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                          std::vector<Eigen::MatrixXd>* activations) const {
    Eigen::MatrixXd a = x;
    if (activations) activations->assign(1, a);
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const int in = sizes[l];
      const int out = sizes[l + 1];
      Eigen::Map<const Eigen::MatrixXd> w(theta.data() + offset, out, in);
      Eigen::Map<const Eigen::VectorXd> b(theta.data() + offset + static_cast<Eigen::Index>(in) * out, out);
      offset += static_cast<Eigen::Index>(in) * out + out;
      Eigen::MatrixXd z = w * a;
      z.colwise() += b;
      if (l + 1 < layer_count()) {
        a = z.array().tanh().matrix();
        if (activations) activations->push_back(a);
      } else {
        a = std::move(z);
      }
    }
    return a;
  }

  double raw_noise(const Eigen::VectorXd& theta, const Eigen::MatrixXd& out, Eigen::Index col) const {
    return heteroscedastic ? out(1, col) : theta[theta.size() - 1];
  }

  double noise_sd(double raw) const { return softplus(raw) + noise_floor; }

  // Gradient of scale * mean_batch(NLL) + ||theta||^2 / (2 prior^2).
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           double scale, double prior_scale) const {
    std::vector<Eigen::MatrixXd> acts;
    const Eigen::MatrixXd out = forward(theta, x, &acts);
    const Eigen::Index batch = x.cols();
    const double weight = scale / static_cast<double>(batch);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), batch);
    double noise_grad = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
      const double raw = raw_noise(theta, out, i);
      const double sd = noise_sd(raw);
      const double r = y[i] - out(0, i);
      delta(0, i) = -r / (sd * sd) * weight;
      const double dsd = (1.0 / sd - r * r / (sd * sd * sd)) * sigmoid(raw) * weight;
      if (heteroscedastic) {
        delta(1, i) = dsd;
      } else {
        noise_grad += dsd;
      }
    }
    Eigen::VectorXd grad = theta / (prior_scale * prior_scale);
    if (!heteroscedastic) grad[grad.size() - 1] += noise_grad;

    std::vector<Eigen::Index> offsets(layer_count());
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      offsets[l] = offset;
      offset += static_cast<Eigen::Index>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
    }
    for (std::size_t l = layer_count(); l-- > 0;) {
      const int in = sizes[l];
      const int out_size = sizes[l + 1];
      Eigen::Map<const Eigen::MatrixXd> w(theta.data() + offsets[l], out_size, in);
      Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets[l], out_size, in);
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + static_cast<Eigen::Index>(in) * out_size, out_size);
      gw += delta * acts[l].transpose();
      gb += delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd back = w.transpose() * delta;
        delta = (back.array() * (1.0 - acts[l].array().square())).matrix();
      }
    }
    return grad;
  }
};

}  // namespace

BnnEnsemble fit_bnn(const SurrogateDataset& data, const SghmcConfig& config) {
  config.validate();
  data.validate();
  if (data.size() < 3) throw InsufficientDataError("surrogate fit needs at least three points");
  const std::size_t n = data.size();
  const auto d = static_cast<int>(data.dimension());
  const FitSchedule schedule = fit_schedule(n, config);

  BnnEnsemble model;
  model.config_ = config;
  model.input_dim_ = d;
  double mean = std::accumulate(data.targets.begin(), data.targets.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double y : data.targets) var += (y - mean) * (y - mean);
  var /= static_cast<double>(n);
  model.target_mean_ = mean;
  model.target_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;

  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(n));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(j, static_cast<Eigen::Index>(i)) = data.inputs[i][j];
    y[static_cast<Eigen::Index>(i)] = (data.targets[i] - model.target_mean_) / model.target_scale_;
  }

  const Network net(d, config);
  RandomStream root(config.seed);
  RandomStream init_rng = root.split({1});
  RandomStream batch_rng = root.split({2});
  RandomStream noise_rng = root.split({3});
  Eigen::VectorXd theta = net.initialize(init_rng);

  const Eigen::Index p = theta.size();
  Eigen::VectorXd tau = Eigen::VectorXd::Ones(p);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(p);
  Eigen::VectorXd v_hat = Eigen::VectorXd::Ones(p);
  Eigen::VectorXd momentum = Eigen::VectorXd::Zero(p);
  const double lr = config.step_size;
  const double mdecay = config.momentum_decay;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;
  const auto batch = static_cast<std::size_t>(schedule.minibatch);
  Eigen::MatrixXd xb(d, static_cast<Eigen::Index>(batch));
  Eigen::VectorXd yb(static_cast<Eigen::Index>(batch));

  const int total = schedule.burn_in_steps + schedule.sampling_steps;
  for (int step = 1; step <= total; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == n) {
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[batch_rng.below(i + 1)]);
        cursor = 0;
      }
      const auto idx = static_cast<Eigen::Index>(order[cursor++]);
      xb.col(static_cast<Eigen::Index>(b)) = x.col(idx);
      yb[static_cast<Eigen::Index>(b)] = y[idx];
    }
    const Eigen::VectorXd grad = net.gradient(theta, xb, yb, static_cast<double>(n), config.prior_scale);
    if (step <= schedule.burn_in_steps) {
      const Eigen::VectorXd r = (tau.array() + 1.0).inverse().matrix();
      tau = (tau.array() - tau.array() * g.array().square() / v_hat.array() + 1.0).matrix();
      g = (g.array() - g.array() * r.array() + r.array() * grad.array()).matrix();
      v_hat = (v_hat.array() - v_hat.array() * r.array() + r.array() * grad.array().square()).matrix();
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      const double minv = 1.0 / std::sqrt(std::max(v_hat[i], 1e-300));
      const double noise_scale = 2.0 * lr * lr * mdecay * minv - lr * lr * lr * lr;
      const double sigma = std::sqrt(std::max(noise_scale, 1e-16));
      momentum[i] += -lr * lr * minv * grad[i] - mdecay * momentum[i] + sigma * noise_rng.normal();
      theta[i] += momentum[i];
    }
    const int sampling_step = step - schedule.burn_in_steps;
    if (sampling_step > 0 && sampling_step % schedule.keep_every == 0) model.samples_.push_back(theta);
  }
  return model;
}

std::vector<BnnEnsemble::SampleOutput> BnnEnsemble::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim_) throw ParameterError("query point has the wrong dimension");
  if (samples_.empty()) throw ParameterError("surrogate has no weight samples");
  const Network net(input_dim_, config_);
  Eigen::MatrixXd col(input_dim_, 1);
  for (int j = 0; j < input_dim_; ++j) col(j, 0) = x[j];
  std::vector<SampleOutput> out;
  out.reserve(samples_.size());
  for (const auto& theta : samples_) {
    const Eigen::MatrixXd o = net.forward(theta, col, nullptr);
    out.push_back({o(0, 0) * target_scale_ + target_mean_, net.noise_sd(net.raw_noise(theta, o, 0)) * target_scale_});
  }
  return out;
}

namespace {

void unzip(const std::vector<BnnEnsemble::SampleOutput>& outputs, std::vector<double>& f, std::vector<double>& w) {
  f.clear();
  w.clear();
  for (const auto& o : outputs) {
    f.push_back(o.f);
    w.push_back(o.noise_sd);
  }
}

}  // namespace

SurrogatePosterior BnnEnsemble::predict_homoscedastic(std::span<const double> x) const {
  std::vector<double> f;
  std::vector<double> w;
  unzip(evaluate(x), f, w);
  return combine_homoscedastic(f, w);
}

SurrogatePosterior BnnEnsemble::predict_heteroscedastic(std::span<const double> x) const {
  std::vector<double> f;
  std::vector<double> w;
  unzip(evaluate(x), f, w);
  return combine_heteroscedastic(f, w);
}

SurrogatePosterior BnnEnsemble::predict(std::span<const double> x) const {
  return config_.noise == NoiseModel::Heteroscedastic ? predict_heteroscedastic(x) : predict_homoscedastic(x);
}

double BnnEnsemble::predict_mean(std::span<const double> x) const {
  double total = 0.0;
  const auto outputs = evaluate(x);
  for (const auto& o : outputs) total += o.f;
  return total / static_cast<double>(outputs.size());
}

std::vector<SurrogatePosterior> BnnEnsemble::predict_many(std::span<const std::vector<double>> xs, int threads) const {
  std::vector<SurrogatePosterior> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = predict(xs[i]); });
  return out;
}

namespace {

Eigen::MatrixXd as_columns(std::span<const std::vector<double>> xs, int dim) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (static_cast<int>(xs[i].size()) != dim) throw ParameterError("query point has the wrong dimension");
    for (int j = 0; j < dim; ++j) x(j, static_cast<Eigen::Index>(i)) = xs[i][j];
  }
  return x;
}

}  // namespace

std::vector<SurrogatePosterior> BnnEnsemble::predict_batch(std::span<const std::vector<double>> xs) const {
  if (samples_.empty()) throw ParameterError("surrogate has no weight samples");
  const Network net(input_dim_, config_);
  const Eigen::MatrixXd x = as_columns(xs, input_dim_);
  const auto s = static_cast<Eigen::Index>(samples_.size());
  Eigen::MatrixXd f(s, x.cols());
  Eigen::MatrixXd w(s, x.cols());
  for (Eigen::Index k = 0; k < s; ++k) {
    const auto& theta = samples_[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd o = net.forward(theta, x, nullptr);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      f(k, i) = o(0, i) * target_scale_ + target_mean_;
      w(k, i) = net.noise_sd(net.raw_noise(theta, o, i)) * target_scale_;
    }
  }
  std::vector<SurrogatePosterior> out;
  out.reserve(xs.size());
  std::vector<double> fc(static_cast<std::size_t>(s));
  std::vector<double> wc(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index k = 0; k < s; ++k) {
      fc[static_cast<std::size_t>(k)] = f(k, i);
      wc[static_cast<std::size_t>(k)] = w(k, i);
    }
    out.push_back(combine(fc, wc));
  }
  return out;
}

std::vector<double> BnnEnsemble::predict_mean_batch(std::span<const std::vector<double>> xs) const {
  if (samples_.empty()) throw ParameterError("surrogate has no weight samples");
  const Network net(input_dim_, config_);
  const Eigen::MatrixXd x = as_columns(xs, input_dim_);
  std::vector<double> out(xs.size(), 0.0);
  for (const auto& theta : samples_) {
    const Eigen::MatrixXd o = net.forward(theta, x, nullptr);
    for (Eigen::Index i = 0; i < x.cols(); ++i) out[static_cast<std::size_t>(i)] += o(0, i) * target_scale_ + target_mean_;
  }
  for (auto& v : out) v /= static_cast<double>(samples_.size());
  return out;
}

json BnnEnsemble::to_json() const {
  json samples = json::array();
  for (const auto& s : samples_) samples.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  return {{"schema", "nago-bnn/1"},
          {"config", nago::to_json(config_)},
          {"input_dim", input_dim_},
          {"target_mean", target_mean_},
          {"target_scale", target_scale_},
          {"samples", samples}};
}

BnnEnsemble BnnEnsemble::from_json(const json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != "nago-bnn/1") throw ProtocolError("unsupported surrogate checkpoint schema");
    BnnEnsemble m;
    m.config_ = sghmc_config_from_json(doc.at("config"));
    m.input_dim_ = doc.at("input_dim").get<int>();
    m.target_mean_ = doc.at("target_mean").get<double>();
    m.target_scale_ = doc.at("target_scale").get<double>();
    if (m.input_dim_ < 1 || !(m.target_scale_ > 0.0)) throw ProtocolError("surrogate checkpoint has invalid constants");
    const Network net(m.input_dim_, m.config_);
    for (const auto& s : doc.at("samples")) {
      const auto values = s.get<std::vector<double>>();
      if (static_cast<Eigen::Index>(values.size()) != net.parameter_count()) {
        throw ProtocolError("surrogate checkpoint sample has the wrong parameter count");
      }
      m.samples_.emplace_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    if (m.samples_.empty()) throw ProtocolError("surrogate checkpoint has no samples");
    return m;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("surrogate checkpoint: ") + e.what());
  }
}

bool BnnEnsemble::operator==(const BnnEnsemble& other) const {
  if (!(config_ == other.config_) || input_dim_ != other.input_dim_ || target_mean_ != other.target_mean_ ||
      target_scale_ != other.target_scale_ || samples_.size() != other.samples_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i] != other.samples_[i]) return false;
  }
  return true;
}

}  // namespace nago
