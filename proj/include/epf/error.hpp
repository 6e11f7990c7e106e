// Copyright 2026 The EPF Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epf {

// Base of every error raised by the library. Callers that only care about
// "something in the pipeline failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch between operands. Carries both shapes for diagnostics.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t lhs_rows, std::size_t lhs_cols,
                 std::size_t rhs_rows, std::size_t rhs_cols);
  DimensionError(const std::string& what) : Error(what) {}

  std::size_t lhs_rows = 0, lhs_cols = 0, rhs_rows = 0, rhs_cols = 0;
};

// Value outside the mathematical domain of an operation (log of <= 0, NaN input).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t index = 0) : Error(what), index(index) {}
  std::size_t index;
};

// Violated precondition on structured arguments (trace/params mismatch, empty window).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Finite-difference oracle hit a non-finite function value.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::size_t coordinate) : Error(what), coordinate(coordinate) {}
  std::size_t coordinate;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// CSV / input parse failure; message carries file:line.
class ParseError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace epf
