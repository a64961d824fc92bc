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

// Text, JSON and CSV renderings of analysis and evaluation reports. The JSON
// layouts are described in README.md.

#pragma once

#include <map>
#include <span>
#include <string>

#include "pihte/cte.hpp"

namespace pihte {

// Factor as {"scope": [names], "rows": [[state, ..., value], ...]}.
std::string factor_json(const SparseFactor& f, const VarSpace& space);

// Timing fields are left out when include_timing is false, which makes the
// output byte-identical across runs with the same inputs.
std::string report_json(const EvalReport& report, const std::map<std::string, State>& do_assignment,
                        bool include_timing = true);

// "samples,time,max_table_size,t,density"
std::string metrics_csv_header();
// Time in seconds with 3 decimals, density in scientific notation.
std::string metrics_csv_row(const MetricsRow& row);

std::string analysis_text(const AnalysisReport& report);
std::string analysis_json(const AnalysisReport& report);
// One row per level: level,parent,factors,vars,treewidth,hyperwidth,...
std::string analysis_csv(const AnalysisReport& report);

// Readable table of a result factor, one "A=0 B=1  value" line per entry.
std::string factor_table(const SparseFactor& f, const VarSpace& space);

}  // namespace pihte
