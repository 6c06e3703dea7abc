//
// Copyright 2026 The huberdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef HUBERDP_ERRORS_HPP_
#define HUBERDP_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace huberdp {

// Argument outside the mathematical domain of a function (non-positive
// alpha, non-finite t, delta outside (0, 1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A configuration object that cannot be turned into a runnable computation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested noise variance is not reachable by any finite Huber alpha.
class CalibrationInfeasibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A linear system that should have been symmetric positive definite was not.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two independent evaluations of the same quantity disagree. Always a bug.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller asked for something the data cannot support, e.g. all-entries RMSE
// against a partially observed matrix.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace huberdp

#endif  // HUBERDP_ERRORS_HPP_
