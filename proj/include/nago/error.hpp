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
#include <stdexcept>
#include <string>

namespace nago {

// Base class for every error raised by the library. The CLI maps any of these
// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter is outside the domain of the operation (e.g. WS with k >= n,
// non-normalized categorical weights).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The top-level graph has fewer nodes than there are stages.
class InfeasibleSplitError : public Error {
 public:
  using Error::Error;
};

// The requested parameter budget cannot be met even with one channel per
// stage. Carries the smallest achievable parameter count.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::int64_t minimum_params)
      : Error(what), minimum_params_(minimum_params) {}

  std::int64_t minimum_params() const { return minimum_params_; }

 private:
  std::int64_t minimum_params_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Malformed input documents or worker wire-protocol
// violations.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace nago
