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

#include "nago/eval_bridge.hpp"

#include <cmath>
#include <cstdlib>

#include "nago/error.hpp"
#include "nago/generator.hpp"
#include "nago/parallel.hpp"
#include "nago/proxy_model.hpp"
#include "nago/random.hpp"

namespace nago {

using nlohmann::json;

std::string canonical_objective(const std::string& name) {
  if (name == "error" || name == "val_error") return kValError;
  if (name == "memory" || name == "memory_mb") return kMemoryMb;
  if (name == "time" || name == "train_time_s") return kTrainTime;
  return name;
}

std::string to_string(EvalStatus status) { return status == EvalStatus::Ok ? "ok" : "failed"; }

json to_json(const EvalRequest& r) {
  json doc = {{"type", "evaluate"},       {"id", r.id},         {"space", r.space},
              {"theta", r.theta},         {"budget", r.budget}, {"dataset", r.dataset},
              {"seed", r.seed},           {"param_budget", r.param_budget},
              {"objectives", r.objectives}};
  if (r.ir) doc["ir"] = *r.ir;
  return doc;
}

json to_json(const EvalResponse& r) {
  json objectives = json::object();
  for (const auto& [k, v] : r.objectives) objectives[k] = v;
  return {{"type", "result"}, {"id", r.id}, {"status", to_string(r.status)}, {"objectives", objectives},
          {"message", r.message}};
}

EvalRequest eval_request_from_json(const json& doc) {
  try {
    if (doc.value("type", std::string("evaluate")) != "evaluate") throw ProtocolError("not an evaluate message");
    EvalRequest r;
    r.id = doc.at("id").get<std::string>();
    r.space = doc.value("space", r.space);
    r.theta = doc.value("theta", json::object());
    if (doc.contains("ir") && !doc.at("ir").is_null()) r.ir = doc.at("ir");
    r.budget = doc.at("budget").get<double>();
    r.dataset = doc.value("dataset", r.dataset);
    r.seed = doc.value("seed", r.seed);
    r.param_budget = doc.value("param_budget", r.param_budget);
    if (doc.contains("objectives")) r.objectives = doc.at("objectives").get<std::vector<std::string>>();
    if (r.id.empty()) throw ProtocolError("request id must be nonempty");
    if (!(r.budget > 0.0)) throw ProtocolError("request budget must be positive");
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("evaluate message: ") + e.what());
  }
}

EvalResponse eval_response_from_json(const json& doc) {
  try {
    if (doc.at("type").get<std::string>() != "result") throw ProtocolError("not a result message");
    EvalResponse r;
    r.id = doc.at("id").get<std::string>();
    const auto status = doc.at("status").get<std::string>();
    if (status == "ok") {
      r.status = EvalStatus::Ok;
    } else if (status == "failed") {
      r.status = EvalStatus::Failed;
    } else {
      throw ProtocolError("unknown result status '" + status + "'");
    }
    if (doc.contains("objectives")) {
      for (const auto& [k, v] : doc.at("objectives").items()) {
        if (v.is_null()) continue;
        r.objectives[k] = v.get<double>();
      }
    }
    r.message = doc.value("message", std::string());
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("result message: ") + e.what());
  }
}

EvalResponse check_response(const EvalRequest& request, EvalResponse response) {
  if (!response.ok()) return response;
  for (const auto& name : request.objectives) {
    const auto it = response.objectives.find(name);
    if (it == response.objectives.end() || !std::isfinite(it->second)) {
      response.status = EvalStatus::Failed;
      response.message = "missing or non-finite objective '" + name + "'";
      return response;
    }
  }
  return response;
}

EvalResponse Evaluator::evaluate(const EvalRequest& request) {
  return evaluate_batch(std::span<const EvalRequest>(&request, 1)).front();
}

namespace {

EvalResponse failed(const std::string& id, const std::string& message) {
  EvalResponse r;
  r.id = id;
  r.status = EvalStatus::Failed;
  r.message = message;
  return r;
}

std::vector<double> theta_point(const EvalRequest& request) {
  if (!request.theta.contains("x")) throw ParameterError("builtin benchmarks need theta.x");
  return request.theta.at("x").get<std::vector<double>>();
}

}  // namespace

BuiltinEvaluator::BuiltinEvaluator(std::string name, BuiltinOptions options)
    : name_(std::move(name)), options_(options) {
  if (name_ != "sphere-mf" && name_ != "biobj-toy") throw ParameterError("unknown builtin benchmark '" + name_ + "'");
  if (!(options_.max_budget > 0.0)) throw ParameterError("max_budget must be positive");
}

std::vector<double> BuiltinEvaluator::sphere_optimum(std::size_t dimension) { return std::vector<double>(dimension, 0.3); }

EvalResponse BuiltinEvaluator::run(const EvalRequest& request) const {
  EvalResponse r;
  r.id = request.id;
  try {
    const auto x = theta_point(request);
    if (x.empty()) throw ParameterError("theta.x is empty");
    if (name_ == "sphere-mf") {
      double f = 0.0;
      for (double v : x) f += (v - 0.3) * (v - 0.3);
      const double b = std::min(request.budget, options_.max_budget);
      const double sd = options_.noise_scale * (std::sqrt(options_.max_budget / b) - 1.0);
      if (sd > 0.0) {
        RandomStream rng(request.seed);
        f += sd * rng.normal();
      }
      r.objectives[kValError] = f;
    } else {
      r.objectives["f1"] = x[0] * x[0];
      r.objectives["f2"] = (x[0] - 1.0) * (x[0] - 1.0);
    }
  } catch (const std::exception& e) {
    return failed(request.id, e.what());
  }
  return check_response(request, r);
}

std::vector<EvalResponse> BuiltinEvaluator::evaluate_batch(std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(run(r));
  return out;
}

ProxyEvaluator::ProxyEvaluator(ProxyOptions options) : options_(options) {
  if (!(options_.max_budget > 0.0)) throw ParameterError("max_budget must be positive");
}

EvalResponse ProxyEvaluator::run(const EvalRequest& request) const {
  EvalResponse r;
  r.id = request.id;
  try {
    ArchitectureIR ir;
    if (request.ir) {
      ir = ir_from_json(*request.ir);
    } else {
      SampleOptions so;
      so.cost = options_.cost;
      if (request.space == "hnag") {
        ir = sample_hnag(hnag_theta_from_json(request.theta), request.seed, request.param_budget, so);
      } else if (request.space == "rnag") {
        ir = sample_rnag(rnag_theta_from_json(request.theta), request.seed, request.param_budget, so);
      } else {
        throw ParameterError("proxy evaluator needs an hnag or rnag space, got '" + request.space + "'");
      }
    }
    const CostReport cost = price(ir, options_.memory, options_.cost);
    const ProxyFeatures features = proxy_features(ir, cost);
    const std::uint64_t noise_seed = mix64(request.seed ^ hash_string("proxy-noise"));
    r.objectives[kValError] = proxy_error(features, request.budget, options_.max_budget, noise_seed);
    r.objectives[kMemoryMb] = cost.memory_mb;
    r.objectives[kTrainTime] = cost.time_proxy * request.budget;
  } catch (const std::exception& e) {
    return failed(request.id, e.what());
  }
  return check_response(request, r);
}

std::vector<EvalResponse> ProxyEvaluator::evaluate_batch(std::span<const EvalRequest> requests) {
  std::vector<EvalResponse> out(requests.size());
  parallel_for(requests.size(), options_.threads, [&](std::size_t i) { out[i] = run(requests[i]); });
  return out;
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& spec, const EvaluatorOptions& options) {
  if (spec.rfind("builtin:", 0) == 0) return std::make_unique<BuiltinEvaluator>(spec.substr(8), options.builtin);
  if (spec == "proxy") return std::make_unique<ProxyEvaluator>(options.proxy);
  if (spec == "worker") {
    const char* cmd = std::getenv("NAGO_WORKER");
    if (!cmd || !*cmd) throw ParameterError("evaluator 'worker' needs NAGO_WORKER to name the worker command");
    return spawn_worker(cmd, options.worker);
  }
  if (spec.rfind("worker:", 0) == 0) return spawn_worker(spec.substr(7), options.worker);
  throw ParameterError("unknown evaluator '" + spec + "' (expected builtin:<name>, proxy or worker:<cmd>)");
}

EvalRequest SearchProblem::make_request(std::string id, std::span<const double> unit, double budget,
                                        std::uint64_t seed) const {
  EvalRequest r;
  r.id = std::move(id);
  r.space = domain.space();
  r.theta = domain.theta_json(domain.to_native(unit));
  r.budget = budget;
  r.dataset = dataset;
  r.seed = seed;
  r.param_budget = param_budget;
  r.objectives = objectives;
  return r;
}

}  // namespace nago
