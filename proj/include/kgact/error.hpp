// Copyright 2026 The kgact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KGACT_ERROR_HPP_
#define KGACT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgact {

// Base of every error the engine reports. Callers that isolate failures
// per clip catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input whose values are unusable (zero vectors, out-of-range
// probabilities, unknown concepts).
class DataError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or degenerate configuration (empty graph, all-zero affinity
// matrix, fingerprint mismatch, empty vocabulary).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of a public operation.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgact

#endif  // KGACT_ERROR_HPP_
