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

// Seeds for randomized tests. PIHTE_TEST_SEEDS="a,b,c" overrides the
// default three.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

inline std::vector<std::uint64_t> test_seeds() {
  std::vector<std::uint64_t> seeds;
  if (const char* env = std::getenv("PIHTE_TEST_SEEDS")) {
    std::istringstream is(env);
    std::string item;
    while (std::getline(is, item, ',')) {
      if (!item.empty()) seeds.push_back(std::stoull(item));
    }
  }
  if (seeds.empty()) seeds = {11, 23, 47};
  return seeds;
}
