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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "nago/error.hpp"
#include "nago/eval_bridge.hpp"

extern char** environ;

namespace nago {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

void set_cloexec(int fd) { ::fcntl(fd, F_SETFD, ::fcntl(fd, F_GETFD) | FD_CLOEXEC); }

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Buffered line reader over a file descriptor that can also be woken through
// a second descriptor.
class LineReader {
 public:
  LineReader(int fd, int wake_fd) : fd_(fd), wake_fd_(wake_fd) {}

  enum class Result { Line, Eof, Timeout, Woken };

  Result read_line(std::string& line, std::optional<Clock::time_point> deadline) {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return Result::Line;
      }
      if (eof_) return Result::Eof;
      int timeout_ms = -1;
      if (deadline) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
        if (left <= 0) return Result::Timeout;
        timeout_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
      }
      pollfd fds[2] = {{fd_, POLLIN, 0}, {wake_fd_, POLLIN, 0}};
      const int rc = ::poll(fds, wake_fd_ >= 0 ? 2 : 1, timeout_ms);
      if (rc < 0) {
        if (errno == EINTR) continue;
        eof_ = true;
        continue;
      }
      if (rc == 0) return Result::Timeout;
      if (wake_fd_ >= 0 && (fds[1].revents & POLLIN)) return Result::Woken;
      char chunk[4096];
      const ssize_t n = ::read(fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  int wake_fd_;
  std::string buffer_;
  bool eof_ = false;
};

}  // namespace

struct WorkerEvaluator::Impl {
  std::string command;
  WorkerOptions options;
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  int wake_read = -1;
  int wake_write = -1;
  json hello;
  std::unique_ptr<LineReader> lines;

  std::mutex write_mutex;
  std::mutex mutex;
  std::condition_variable cv;
  struct Pending {
    std::optional<EvalResponse> response;
    Clock::time_point sent;
  };
  std::unordered_map<std::string, Pending> pending;
  std::deque<double> latencies_ms;
  bool dead = false;
  std::string death_reason;
  std::string protocol_error;
  std::thread reader;

  ~Impl() { shutdown(); }

  void start() {
    int in_pipe[2];
    int out_pipe[2];
    int wake[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(wake) != 0) {
      throw Error(errno_text("worker pipe"));
    }
    for (int fd : {in_pipe[1], out_pipe[0], wake[0], wake[1]}) set_cloexec(fd);
    // A worker that exits early must not kill the host with SIGPIPE.
    ::signal(SIGPIPE, SIG_IGN);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, in_pipe[0]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[1]);

    std::vector<std::string> env_store;
    for (char** e = environ; e && *e; ++e) env_store.emplace_back(*e);
    for (const auto& extra : options.environment) env_store.push_back(extra);
    std::vector<char*> envp;
    for (auto& s : env_store) envp.push_back(s.data());
    envp.push_back(nullptr);
    std::string sh = "/bin/sh";
    std::string dash_c = "-c";
    std::string cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

    const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, envp.data());
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child = in_pipe[1];
    from_child = out_pipe[0];
    wake_read = wake[0];
    wake_write = wake[1];
    lines = std::make_unique<LineReader>(from_child, wake_read);
    if (rc != 0) {
      pid = -1;
      errno = rc;
      throw Error(errno_text("cannot spawn worker"));
    }
    handshake();
    reader = std::thread([this] { read_loop(); });
  }

  bool write_line(const std::string& line) {
    std::lock_guard lock(write_mutex);
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      const ssize_t n = ::write(to_child, p, left);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    return true;
  }

  void handshake() {
    const json hi = {{"type", "hello"}, {"protocol", kProtocolVersion}};
    if (!write_line(hi.dump())) throw ProtocolError("worker closed its input before the handshake");
    std::string line;
    const auto deadline = Clock::now() + options.handshake_timeout;
    for (;;) {
      const auto res = lines->read_line(line, deadline);
      if (res == LineReader::Result::Eof) throw ProtocolError("worker exited before the handshake");
      if (res != LineReader::Result::Line) throw ProtocolError("worker handshake timed out");
      if (line.empty()) continue;
      json doc = json::parse(line, nullptr, false);
      if (doc.is_discarded() || !doc.is_object() || doc.value("type", std::string()) != "hello") {
        throw ProtocolError("worker sent '" + line.substr(0, 80) + "' instead of a hello message");
      }
      const auto version = doc.value("protocol", std::string());
      if (version != kProtocolVersion) {
        throw ProtocolError("worker speaks protocol '" + version + "', expected " + kProtocolVersion);
      }
      hello = doc;
      break;
    }
  }

  void read_loop() {
    std::string line;
    for (;;) {
      const auto res = lines->read_line(line, std::nullopt);
      if (res == LineReader::Result::Woken) break;
      if (res == LineReader::Result::Eof) {
        mark_dead("worker exited");
        return;
      }
      if (res != LineReader::Result::Line || line.empty()) continue;
      json doc = json::parse(line, nullptr, false);
      EvalResponse response;
      try {
        if (doc.is_discarded()) throw ProtocolError("worker sent malformed JSON: '" + line.substr(0, 80) + "'");
        response = eval_response_from_json(doc);
      } catch (const ProtocolError& e) {
        std::lock_guard lock(mutex);
        protocol_error = e.what();
        cv.notify_all();
        continue;
      }
      std::lock_guard lock(mutex);
      const auto it = pending.find(response.id);
      if (it == pending.end() || it->second.response) continue;  // late or unknown id
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - it->second.sent).count();
      latencies_ms.push_back(ms);
      while (latencies_ms.size() > options.median_window) latencies_ms.pop_front();
      it->second.response = std::move(response);
      cv.notify_all();
    }
    mark_dead("worker shut down");
  }

  void mark_dead(const std::string& reason) {
    std::lock_guard lock(mutex);
    if (!dead) {
      dead = true;
      death_reason = reason;
    }
    cv.notify_all();
  }

  std::chrono::milliseconds current_timeout() const {
    if (latencies_ms.empty()) return options.timeout_floor;
    std::vector<double> sorted(latencies_ms.begin(), latencies_ms.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return std::max(options.timeout_floor, std::chrono::milliseconds(static_cast<long long>(10.0 * median)));
  }

  std::vector<EvalResponse> evaluate_batch(std::span<const EvalRequest> requests) {
    std::vector<EvalResponse> out(requests.size());
    std::vector<bool> owned(requests.size(), false);
    std::vector<Clock::time_point> deadlines(requests.size());
    {
      std::unique_lock lock(mutex);
      for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& id = requests[i].id;
        out[i].id = id;
        out[i].status = EvalStatus::Failed;
        if (dead) {
          out[i].message = death_reason;
          continue;
        }
        if (pending.count(id)) {
          out[i].message = "duplicate in-flight request id";
          continue;
        }
        pending[id] = Pending{std::nullopt, Clock::now()};
        owned[i] = true;
      }
    }
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (!owned[i]) continue;
      const auto sent = Clock::now();
      {
        std::lock_guard lock(mutex);
        pending[requests[i].id].sent = sent;
        deadlines[i] = sent + current_timeout();
      }
      if (!write_line(to_json(requests[i]).dump())) mark_dead("worker closed its input");
    }

    std::unique_lock lock(mutex);
    for (;;) {
      if (!protocol_error.empty()) {
        const std::string message = protocol_error;
        for (std::size_t i = 0; i < requests.size(); ++i) {
          if (owned[i]) pending.erase(requests[i].id);
        }
        lock.unlock();
        throw ProtocolError(message);
      }
      bool waiting = false;
      auto next_deadline = Clock::time_point::max();
      const auto now = Clock::now();
      for (std::size_t i = 0; i < requests.size(); ++i) {
        if (!owned[i]) continue;
        auto it = pending.find(requests[i].id);
        if (it->second.response) {
          out[i] = check_response(requests[i], *it->second.response);
          pending.erase(it);
          owned[i] = false;
        } else if (dead) {
          out[i].message = death_reason + " before answering";
          pending.erase(it);
          owned[i] = false;
        } else if (now >= deadlines[i]) {
          const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - it->second.sent).count();
          out[i].message = "timed out after " + std::to_string(ms) + " ms";
          pending.erase(it);
          owned[i] = false;
        } else {
          waiting = true;
          next_deadline = std::min(next_deadline, deadlines[i]);
        }
      }
      if (!waiting) break;
      cv.wait_until(lock, next_deadline);
    }
    return out;
  }

  void shutdown() {
    if (to_child >= 0) {
      write_line(json{{"type", "shutdown"}}.dump());
      ::close(to_child);
      to_child = -1;
    }
    if (pid > 0) {
      int status = 0;
      const auto deadline = Clock::now() + std::chrono::seconds(2);
      while (::waitpid(pid, &status, WNOHANG) == 0) {
        if (Clock::now() > deadline) {
          ::kill(pid, SIGKILL);
          ::waitpid(pid, &status, 0);
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      pid = -1;
    }
    if (reader.joinable()) {
      const char byte = 1;
      [[maybe_unused]] const ssize_t n = ::write(wake_write, &byte, 1);
      reader.join();
    }
    for (int* fd : {&from_child, &wake_read, &wake_write}) {
      if (*fd >= 0) ::close(*fd);
      *fd = -1;
    }
  }
};

WorkerEvaluator::WorkerEvaluator(const std::string& command, WorkerOptions options) : impl_(std::make_unique<Impl>()) {
  if (command.empty()) throw ParameterError("worker command is empty");
  impl_->command = command;
  impl_->options = std::move(options);
  impl_->start();
}

WorkerEvaluator::~WorkerEvaluator() = default;

std::vector<EvalResponse> WorkerEvaluator::evaluate_batch(std::span<const EvalRequest> requests) {
  return impl_->evaluate_batch(requests);
}

std::string WorkerEvaluator::describe() const { return "worker:" + impl_->command; }

const json& WorkerEvaluator::hello() const { return impl_->hello; }

int WorkerEvaluator::pid() const { return impl_->pid; }

std::unique_ptr<WorkerEvaluator> spawn_worker(const std::string& command, WorkerOptions options) {
  return std::make_unique<WorkerEvaluator>(command, std::move(options));
}

}  // namespace nago
