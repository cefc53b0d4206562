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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>

#include "nago/error.hpp"
#include "nago/eval_bridge.hpp"
#include "nago/random.hpp"

namespace nago {
namespace {

using nlohmann::json;

TEST(Codec, RequestRoundTrip) {
  EvalRequest r;
  r.id = "t17";
  r.space = "rnag";
  r.theta = {{"n", 32}};
  r.budget = 60;
  r.dataset = "mit67";
  r.seed = 0xffffffffffffffffULL;
  r.param_budget = 6'000'000;
  r.objectives = {kValError, kMemoryMb};
  const json doc = to_json(r);
  EXPECT_EQ(doc.at("type"), "evaluate");
  const EvalRequest back = eval_request_from_json(json::parse(doc.dump()));
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.seed, 0xffffffffffffffffULL);
  r.ir = json{{"format", "nago-ir/1"}};
  EXPECT_EQ(eval_request_from_json(to_json(r)), r);
}

TEST(Codec, RequestDefaultsAndErrors) {
  const auto r = eval_request_from_json(json{{"id", "a"}, {"budget", 1.5}});
  EXPECT_EQ(r.space, "hnag");
  EXPECT_EQ(r.objectives, std::vector<std::string>{kValError});
  EXPECT_THROW(eval_request_from_json(json{{"budget", 1.0}}), ProtocolError);
  EXPECT_THROW(eval_request_from_json(json{{"id", ""}, {"budget", 1.0}}), ProtocolError);
  EXPECT_THROW(eval_request_from_json(json{{"id", "a"}, {"budget", 0.0}}), ProtocolError);
  EXPECT_THROW(eval_request_from_json(json{{"type", "result"}, {"id", "a"}, {"budget", 1.0}}), ProtocolError);
}

TEST(Codec, ResponseRoundTrip) {
  EvalResponse r;
  r.id = "m3";
  r.objectives = {{kValError, 0.25}, {kMemoryMb, 12.5}};
  EXPECT_EQ(eval_response_from_json(json::parse(to_json(r).dump())), r);
  r.status = EvalStatus::Failed;
  r.objectives.clear();
  r.message = "out of memory";
  EXPECT_EQ(eval_response_from_json(to_json(r)), r);
  EXPECT_THROW(eval_response_from_json(json{{"type", "result"}, {"id", "a"}, {"status", "maybe"}}), ProtocolError);
  EXPECT_THROW(eval_response_from_json(json{{"id", "a"}, {"status", "ok"}}), ProtocolError);
  const auto nulls = eval_response_from_json(json{{"type", "result"}, {"id", "a"}, {"status", "ok"}, {"objectives", {{"val_error", nullptr}}}});
  EXPECT_TRUE(nulls.objectives.empty());
}

TEST(Codec, CheckResponse) {
  EvalRequest req;
  req.id = "a";
  req.objectives = {kValError, kMemoryMb};
  EvalResponse res;
  res.id = "a";
  res.objectives = {{kValError, 0.1}};
  EXPECT_FALSE(check_response(req, res).ok());
  res.objectives[kMemoryMb] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(check_response(req, res).ok());
  res.objectives[kMemoryMb] = 3.0;
  EXPECT_TRUE(check_response(req, res).ok());
}

TEST(Objectives, ShortNames) {
  EXPECT_EQ(canonical_objective("error"), kValError);
  EXPECT_EQ(canonical_objective("memory"), kMemoryMb);
  EXPECT_EQ(canonical_objective("time"), kTrainTime);
  EXPECT_EQ(canonical_objective("f1"), "f1");
}

EvalRequest box_request(std::vector<double> x, double budget, std::uint64_t seed = 1) {
  EvalRequest r;
  r.id = "b";
  r.space = "box";
  r.theta = {{"x", x}};
  r.budget = budget;
  r.seed = seed;
  return r;
}

TEST(Builtin, SphereOptimumIsExactAtMaxBudget) {
  BuiltinEvaluator ev("sphere-mf");
  const auto opt = BuiltinEvaluator::sphere_optimum(8);
  const auto r = ev.evaluate(box_request(opt, 120.0));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.objectives.at(kValError), 0.0);
  const auto x = std::vector<double>{0.0, 1.0};
  EXPECT_DOUBLE_EQ(ev.evaluate(box_request(x, 120.0)).objectives.at(kValError), 0.09 + 0.49);
}

TEST(Builtin, PartialBudgetNoise) {
  BuiltinEvaluator ev("sphere-mf");
  const auto opt = BuiltinEvaluator::sphere_optimum(2);
  const double v = ev.evaluate(box_request(opt, 30.0, 42)).objectives.at(kValError);
  RandomStream rng(42);
  EXPECT_DOUBLE_EQ(v, 0.1 * (std::sqrt(4.0) - 1.0) * rng.normal());
  // Sample sd over seeds tracks 0.1 at a quarter budget.
  double s = 0.0, s2 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double e = ev.evaluate(box_request(opt, 30.0, 1000 + i)).objectives.at(kValError);
    s += e;
    s2 += e * e;
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_NEAR(sd, 0.1, 0.1 * 4.0 / std::sqrt(2.0 * n));
}

TEST(Builtin, BiObjective) {
  BuiltinEvaluator ev("biobj-toy");
  auto req = box_request({0.25, 0.9}, 60.0);
  req.objectives = {"f1", "f2"};
  const auto r = ev.evaluate(req);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r.objectives.at("f1"), 0.0625);
  EXPECT_DOUBLE_EQ(r.objectives.at("f2"), 0.5625);
  // Asking for an objective the benchmark lacks fails the trial.
  req.objectives = {kValError};
  EXPECT_FALSE(ev.evaluate(req).ok());
}

TEST(Builtin, BadRequestsFailWithoutThrowing) {
  BuiltinEvaluator ev("sphere-mf");
  EvalRequest r;
  r.id = "x";
  EXPECT_FALSE(ev.evaluate(r).ok());
  EXPECT_THROW(BuiltinEvaluator("nope"), ParameterError);
}

std::vector<EvalRequest> proxy_requests(int count, std::uint64_t seed) {
  SearchProblem p;
  p.objectives = {kValError, kMemoryMb, kTrainTime};
  RandomStream rng(seed);
  std::vector<EvalRequest> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(p.make_request("p" + std::to_string(i), p.domain.sample_unit(rng), 120.0, 7 + i));
  }
  return out;
}

TEST(Proxy, DeterministicAcrossThreads) {
  const auto reqs = proxy_requests(6, 3);
  ProxyOptions one;
  one.threads = 1;
  ProxyOptions many;
  many.threads = 3;
  const auto a = ProxyEvaluator(one).evaluate_batch(reqs);
  const auto b = ProxyEvaluator(many).evaluate_batch(reqs);
  ASSERT_EQ(a.size(), reqs.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_TRUE(a[i].ok()) << a[i].message;
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(a[i].id, reqs[i].id);
    const double err = a[i].objectives.at(kValError);
    EXPECT_GE(err, 0.0);
    EXPECT_LE(err, 1.0);
    EXPECT_GT(a[i].objectives.at(kMemoryMb), 0.0);
    EXPECT_GT(a[i].objectives.at(kTrainTime), 0.0);
  }
}

TEST(Proxy, MemorySpreadsAcrossTheta) {
  const auto reqs = proxy_requests(40, 11);
  const auto res = ProxyEvaluator().evaluate_batch(reqs);
  double lo = 1e300, hi = 0.0;
  for (const auto& r : res) {
    ASSERT_TRUE(r.ok()) << r.message;
    lo = std::min(lo, r.objectives.at(kMemoryMb));
    hi = std::max(hi, r.objectives.at(kMemoryMb));
  }
  EXPECT_GT(hi / lo, 3.0);
}

TEST(Proxy, BoxSpaceFails) {
  EXPECT_FALSE(ProxyEvaluator().evaluate(box_request({0.5}, 10.0)).ok());
}

TEST(MakeEvaluator, Specs) {
  EXPECT_EQ(make_evaluator("proxy")->describe(), "proxy");
  EXPECT_EQ(make_evaluator("builtin:sphere-mf")->describe(), "builtin:sphere-mf");
  EXPECT_THROW(make_evaluator("builtin:nope"), ParameterError);
  EXPECT_THROW(make_evaluator("magic"), ParameterError);
  ::unsetenv("NAGO_WORKER");
  EXPECT_THROW(make_evaluator("worker"), ParameterError);
  EXPECT_THROW(make_evaluator("worker:"), ParameterError);
}

}  // namespace
}  // namespace nago
