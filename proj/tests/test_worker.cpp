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

#include <csignal>
#include <cstdlib>
#include <string>
#include <thread>

#include "nago/error.hpp"
#include "nago/eval_bridge.hpp"

namespace nago {
namespace {

std::string echo(const std::string& args = "") {
  return std::string(NAGO_ECHO_WORKER) + (args.empty() ? "" : " " + args);
}

std::vector<EvalRequest> requests(int n, const std::string& prefix = "r") {
  std::vector<EvalRequest> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].id = prefix + std::to_string(i);
    out[i].budget = 1.0 + i;
    out[i].objectives = {kValError, kMemoryMb};
  }
  return out;
}

void expect_paired(const std::vector<EvalRequest>& req, const std::vector<EvalResponse>& res) {
  ASSERT_EQ(res.size(), req.size());
  for (std::size_t i = 0; i < req.size(); ++i) {
    ASSERT_TRUE(res[i].ok()) << res[i].message;
    EXPECT_EQ(res[i].id, req[i].id);
    EXPECT_EQ(res[i].objectives.at(kValError), req[i].budget);
  }
}

TEST(Worker, HandshakeRecordsHello) {
  WorkerEvaluator w(echo());
  EXPECT_EQ(w.hello().at("protocol"), kProtocolVersion);
  EXPECT_EQ(w.hello().at("name"), "echo");
  EXPECT_GT(w.pid(), 0);
}

TEST(Worker, ExtraEnvironmentReachesWorker) {
  WorkerOptions opts;
  opts.environment = {"ECHO_WORKER_TAG=blue"};
  WorkerEvaluator w(echo(), opts);
  EXPECT_EQ(w.hello().at("tag"), "blue");
}

TEST(Worker, VersionMismatchIsRejected) {
  EXPECT_THROW(WorkerEvaluator(echo("--bad-version")), ProtocolError);
}

TEST(Worker, NonWorkerCommandIsRejected) {
  EXPECT_THROW(WorkerEvaluator("true"), ProtocolError);
  EXPECT_THROW(WorkerEvaluator("echo hello"), ProtocolError);
}

TEST(Worker, HundredRequestsPairById) {
  WorkerEvaluator w(echo());
  const auto req = requests(100);
  expect_paired(req, w.evaluate_batch(req));
}

TEST(Worker, OutOfOrderRepliesPairById) {
  WorkerEvaluator w(echo("--reverse 10"));
  const auto req = requests(10);
  expect_paired(req, w.evaluate_batch(req));
}

TEST(Worker, ConcurrentCallers) {
  WorkerEvaluator w(echo("--sleep-ms 2"));
  std::vector<std::thread> threads;
  std::vector<std::vector<EvalResponse>> results(8);
  std::vector<std::vector<EvalRequest>> reqs;
  for (int t = 0; t < 8; ++t) reqs.push_back(requests(5, "c" + std::to_string(t) + "_"));
  for (int t = 0; t < 8; ++t) threads.emplace_back([&, t] { results[t] = w.evaluate_batch(reqs[t]); });
  for (auto& th : threads) th.join();
  for (int t = 0; t < 8; ++t) expect_paired(reqs[t], results[t]);
}

TEST(Worker, DeathFailsOutstandingRequests) {
  WorkerEvaluator w(echo("--die-after 3"));
  const auto res = w.evaluate_batch(requests(5));
  ASSERT_EQ(res.size(), 5u);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(res[i].ok());
  for (int i = 3; i < 5; ++i) {
    EXPECT_FALSE(res[i].ok());
    EXPECT_FALSE(res[i].message.empty());
  }
  // Later calls fail immediately.
  EXPECT_FALSE(w.evaluate(requests(1, "late")[0]).ok());
}

TEST(Worker, KilledWorkerYieldsFailedStatus) {
  WorkerEvaluator w(echo("--hang"));
  std::thread killer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    ::kill(w.pid(), SIGKILL);
  });
  const auto res = w.evaluate_batch(requests(3));
  killer.join();
  for (const auto& r : res) EXPECT_FALSE(r.ok());
}

TEST(Worker, TimeoutFailsRequest) {
  WorkerOptions opts;
  opts.timeout_floor = std::chrono::milliseconds(150);
  WorkerEvaluator w(echo("--hang"), opts);
  const auto r = w.evaluate(requests(1)[0]);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.message.find("timed out"), std::string::npos);
}

TEST(Worker, GarbageIsProtocolError) {
  WorkerEvaluator w(echo("--garbage"));
  EXPECT_THROW(w.evaluate_batch(requests(1)), ProtocolError);
}

TEST(Worker, SelectedThroughEnvironment) {
  ::setenv("NAGO_WORKER", echo().c_str(), 1);
  auto ev = make_evaluator("worker");
  ::unsetenv("NAGO_WORKER");
  const auto req = requests(3);
  expect_paired(req, ev->evaluate_batch(req));
}

}  // namespace
}  // namespace nago
