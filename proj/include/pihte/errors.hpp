/*
 * Copyright 2026 The pihte Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pihte {

// Failure classes; the CLI maps each one to a distinct exit code.
enum class ErrorClass {
  kInput,     // malformed or inconsistent user input
  kNumeric,   // numeric inconsistency found during evaluation
  kResource,  // a configured size limit was breached
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define PIHTE_INPUT_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what)                        \
        : Error(ErrorClass::kInput, #Name ": " + what) {}         \
  }

PIHTE_INPUT_ERROR(ParseError);
PIHTE_INPUT_ERROR(CycleError);
PIHTE_INPUT_ERROR(UnknownVariable);
PIHTE_INPUT_ERROR(EmptyDataset);
PIHTE_INPUT_ERROR(ScopeConflict);
PIHTE_INPUT_ERROR(IncompleteAssignment);
PIHTE_INPUT_ERROR(DuplicateBoundVar);
PIHTE_INPUT_ERROR(ValidationError);
PIHTE_INPUT_ERROR(UnboundFactor);

#undef PIHTE_INPUT_ERROR

// row is the 1-based data row (the header is not counted).
class DomainViolation : public Error {
 public:
  DomainViolation(std::size_t row, std::string column, long long value);
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }
  long long value() const noexcept { return value_; }

 private:
  std::size_t row_;
  std::string column_;
  long long value_;
};

// Estimand text did not match the grammar. position is a 0-based byte offset.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UncoverableCluster : public Error {
 public:
  explicit UncoverableCluster(const std::string& what)
      : Error(ErrorClass::kInternal, "UncoverableCluster: " + what) {}
};

class DivisionByZero : public Error {
 public:
  explicit DivisionByZero(const std::string& what)
      : Error(ErrorClass::kNumeric, "DivisionByZero: " + what) {}
};

class DivisionInconsistency : public Error {
 public:
  explicit DivisionInconsistency(const std::string& what)
      : Error(ErrorClass::kNumeric, "DivisionInconsistency: " + what) {}
};

class DenseLimitExceeded : public Error {
 public:
  explicit DenseLimitExceeded(const std::string& what)
      : Error(ErrorClass::kResource, "DenseLimitExceeded: " + what) {}
};

class ResourceLimitExceeded : public Error {
 public:
  explicit ResourceLimitExceeded(const std::string& what)
      : Error(ErrorClass::kResource, "ResourceLimitExceeded: " + what) {}
};

}  // namespace pihte
