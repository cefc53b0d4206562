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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nago/cost_model.hpp"
#include "nago/search_domain.hpp"

namespace nago {

inline constexpr const char* kProtocolVersion = "nago-eval/1";

// Objective names used on the wire.
inline constexpr const char* kValError = "val_error";
inline constexpr const char* kMemoryMb = "memory_mb";
inline constexpr const char* kTrainTime = "train_time_s";

// Maps the short CLI names (error, memory, time) to wire names; other names
// pass through unchanged.
std::string canonical_objective(const std::string& name);

struct EvalRequest {
  std::string id;
  std::string space = "hnag";  // hnag | rnag | box
  nlohmann::json theta = nlohmann::json::object();
  std::optional<nlohmann::json> ir;  // evaluate this IR instead of sampling
  double budget = 1.0;
  std::string dataset = "cifar10";
  std::uint64_t seed = 0;
  std::int64_t param_budget = 4'000'000;
  std::vector<std::string> objectives{kValError};

  bool operator==(const EvalRequest&) const = default;
};

enum class EvalStatus { Ok, Failed };

struct EvalResponse {
  std::string id;
  EvalStatus status = EvalStatus::Ok;
  std::map<std::string, double> objectives;
  std::string message;

  bool ok() const { return status == EvalStatus::Ok; }
  bool operator==(const EvalResponse&) const = default;
};

std::string to_string(EvalStatus status);

// Wire codecs. Requests carry "type":"evaluate", responses "type":"result".
nlohmann::json to_json(const EvalRequest& request);
nlohmann::json to_json(const EvalResponse& response);
EvalRequest eval_request_from_json(const nlohmann::json& doc);
EvalResponse eval_response_from_json(const nlohmann::json& doc);

// Marks ok responses that lack a requested objective, or carry a non-finite
// one, as failed.
EvalResponse check_response(const EvalRequest& request, EvalResponse response);

class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // Evaluates all requests, possibly concurrently, and returns one response
  // per request in request order.
  virtual std::vector<EvalResponse> evaluate_batch(std::span<const EvalRequest> requests) = 0;

  EvalResponse evaluate(const EvalRequest& request);

  virtual std::string describe() const = 0;
};

// Synthetic benchmarks on theta = {"x": [...]} with x in [0, 1]^d.
//
//   sphere-mf  f = sum (x_i - 0.3)^2, plus Gaussian noise with standard
//              deviation noise_scale * (sqrt(max_budget / budget) - 1), so the
//              full-budget value is exact. Reports val_error.
//   biobj-toy  f1 = x_0^2, f2 = (x_0 - 1)^2. Reports f1 and f2.
struct BuiltinOptions {
  double max_budget = 120.0;
  double noise_scale = 0.1;
};

class BuiltinEvaluator : public Evaluator {
 public:
  explicit BuiltinEvaluator(std::string name, BuiltinOptions options = {});

  std::vector<EvalResponse> evaluate_batch(std::span<const EvalRequest> requests) override;
  std::string describe() const override { return "builtin:" + name_; }

  static std::vector<double> sphere_optimum(std::size_t dimension);

 private:
  EvalResponse run(const EvalRequest& request) const;

  std::string name_;
  BuiltinOptions options_;
};

// Samples the architecture named by the request and prices it with the cost
// model. val_error is the proxy pseudo-error; train_time_s is
// time_proxy * budget.
struct ProxyOptions {
  double max_budget = 120.0;
  MemoryOptions memory;
  CostOptions cost;
  int threads = 0;
};

class ProxyEvaluator : public Evaluator {
 public:
  explicit ProxyEvaluator(ProxyOptions options = {});

  std::vector<EvalResponse> evaluate_batch(std::span<const EvalRequest> requests) override;
  std::string describe() const override { return "proxy"; }

 private:
  EvalResponse run(const EvalRequest& request) const;

  ProxyOptions options_;
};

struct WorkerOptions {
  // Timeout per request is max(timeout_floor, 10 x rolling median latency).
  std::chrono::milliseconds timeout_floor{60'000};
  std::size_t median_window = 32;
  std::chrono::milliseconds handshake_timeout{30'000};
  std::vector<std::string> environment;  // extra NAME=VALUE entries
};

// External worker speaking the newline-delimited JSON protocol over its
// stdin/stdout. The command runs through /bin/sh -c.
class WorkerEvaluator : public Evaluator {
 public:
  WorkerEvaluator(const std::string& command, WorkerOptions options = {});
  ~WorkerEvaluator() override;

  WorkerEvaluator(const WorkerEvaluator&) = delete;
  WorkerEvaluator& operator=(const WorkerEvaluator&) = delete;

  std::vector<EvalResponse> evaluate_batch(std::span<const EvalRequest> requests) override;
  std::string describe() const override;

  // Worker self-description from its hello message.
  const nlohmann::json& hello() const;
  int pid() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<WorkerEvaluator> spawn_worker(const std::string& command, WorkerOptions options = {});

struct EvaluatorOptions {
  BuiltinOptions builtin;
  ProxyOptions proxy;
  WorkerOptions worker;
};

// "builtin:<name>", "proxy", "worker:<command>" or "worker" (command taken
// from the NAGO_WORKER environment variable).
std::unique_ptr<Evaluator> make_evaluator(const std::string& spec, const EvaluatorOptions& options = {});

// What the searchers optimize: a domain plus the fixed request fields.
struct SearchProblem {
  SearchDomain domain = SearchDomain::hnag();
  std::int64_t param_budget = 4'000'000;
  std::string dataset = "cifar10";
  std::vector<std::string> objectives{kValError};

  EvalRequest make_request(std::string id, std::span<const double> unit, double budget, std::uint64_t seed) const;
};

}  // namespace nago
