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

#include "pihte/errors.hpp"

namespace pihte {

DomainViolation::DomainViolation(std::size_t row, std::string column,
                                 long long value)
    : Error(ErrorClass::kInput,
            "DomainViolation: row " + std::to_string(row) + ", column '" +
                column + "', value " + std::to_string(value)),
      row_(row),
      column_(std::move(column)),
      value_(value) {}

SyntaxError::SyntaxError(std::size_t position, const std::string& what)
    : Error(ErrorClass::kInput, "SyntaxError at position " +
                                    std::to_string(position) + ": " + what),
      position_(position) {}

}  // namespace pihte
