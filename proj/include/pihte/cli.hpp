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

// The pihte command line: analyze, estimate, oracle, simulate, bench.

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "pihte/sparse_factor.hpp"

namespace pihte {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitNumeric = 3,
  kExitResource = 4,
  kExitMismatch = 5,
};

// "X=1,Y=0" -> {X: 1, Y: 0}. Throws ParseError.
std::map<std::string, State> parse_assignment(std::string_view text);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pihte
