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

// Cluster-tree elimination over a tree decomposition, the level-by-level
// plug-in driver over an estimand hierarchy, a dense brute-force oracle, and
// width-based cost bounds.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pihte/decomposition.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "pihte/sparse_factor.hpp"

namespace pihte {

inline constexpr std::size_t kNoEntryLimit = std::numeric_limits<std::size_t>::max();

// Bytes charged per stored entry: 4 per key column plus an 8-byte value.
constexpr std::size_t entry_bytes(std::size_t width) { return width * 4 + 8; }

// Records every materialized table and enforces an entry cap. Products are
// checked before they allocate (see limits()).
class TableMonitor {
 public:
  explicit TableMonitor(std::size_t cap = kNoEntryLimit) : cap_(cap) {}

  // Throws ResourceLimitExceeded when f exceeds the cap.
  void record(const SparseFactor& f);
  ProductLimits limits() const { return {cap_}; }

  std::size_t cap() const { return cap_; }
  std::size_t max_entries() const { return max_entries_; }
  std::size_t total_entries() const { return total_entries_; }
  std::size_t max_bytes() const { return max_bytes_; }
  std::size_t total_bytes() const { return total_bytes_; }
  std::size_t tables() const { return tables_; }

 private:
  std::size_t cap_;
  std::size_t max_entries_ = 0;
  std::size_t total_entries_ = 0;
  std::size_t max_bytes_ = 0;
  std::size_t total_bytes_ = 0;
  std::size_t tables_ = 0;
};

// PIHTE_MAX_ENTRIES, when set to a positive integer.
std::optional<std::size_t> max_entries_from_env();

struct CteOptions {
  TableMonitor* monitor = nullptr;
  // Per factor id: true for inverted child outputs. Rows that find no
  // partner in such a factor are counted into *dropped_unmatched.
  const std::vector<bool>* inverse = nullptr;
  std::size_t* dropped_unmatched = nullptr;
  // Off: multiply the cluster's factors in listed order, then its child
  // messages, and sum out once at the end. On: start from the widest table,
  // add the one bringing the fewest new variables next, and sum a variable
  // out as soon as no remaining table uses it.
  bool greedy = false;
};

// One upward pass from the leaves to td.root. node_vars maps hypergraph nodes
// (the ids used in chi) to factor variable ids. Messages keep the separator
// plus any free variable already present, so free variables split across
// clusters still reach the root. Returns the product of all factors summed
// over every non-free variable.
SparseFactor cte(const TreeDecomposition& td, std::span<const SparseFactor> factors,
                 std::span<const VarId> node_vars, std::span<const VarId> free_vars,
                 const CteOptions& options = {});

struct EvalOptions {
  std::map<std::string, State> do_assignment;
  // Outcome variables for renormalization; empty means the query header's,
  // or else the free variables that appear on the left of some term.
  std::vector<std::string> outcome;
  std::optional<Query> query;
  bool renormalize = true;
  unsigned restarts = 1;
  std::uint64_t seed = 0;
  // Decomposition text per level id, replacing the heuristic for that level.
  std::map<std::size_t, std::string> decomposition_text;
  std::size_t max_entries = kNoEntryLimit;
  bool check_division = true;
  bool greedy = false;
};

struct LevelReport {
  std::size_t level = 0;
  std::optional<std::size_t> parent;
  std::size_t n_factors = 0;
  std::size_t n_vars = 0;
  std::uint32_t k = 1;      // largest domain in the level
  std::size_t t = 0;        // largest input factor tightness
  std::size_t treewidth = 0;
  std::size_t hyperwidth = 0;
  std::optional<std::size_t> hyperwidth_without_child;
  std::string method;
  std::string decomposition;  // text form
  double log10_time_tw = 0.0;
  double log10_time_hw = 0.0;
  std::size_t max_table_entries = 0;
  std::size_t total_entries = 0;
  std::size_t output_entries = 0;
  std::size_t dropped_unmatched = 0;
  double wall_time = 0.0;
};

struct EvalReport {
  VarSpace space;  // names of every variable id used below
  SparseFactor result;  // renormalized when requested
  SparseFactor raw;
  std::vector<std::string> free_vars;
  std::vector<std::string> outcome;
  std::vector<std::string> do_vars;
  bool renormalized = false;
  std::vector<LevelReport> levels;  // bottom-up
  std::size_t n_rows = 0;
  std::size_t t = 0;
  double density = 0.0;
  std::size_t max_table_entries = 0;
  std::size_t total_entries = 0;
  std::size_t max_table_bytes = 0;
  std::size_t dropped_unmatched = 0;
  std::size_t underflow_drops = 0;
  std::size_t hierarchy_bound_exponent = 0;  // sum of level hw
  std::size_t max_level_hyperwidth = 0;
  double realized_exponent = 0.0;  // log(max table) / log(t)
  double wall_time = 0.0;
};

// Ids of the hierarchy's variables: the dataset columns first, in column
// order, then renamed copies in order of appearance.
VarSpace hierarchy_space(const Hierarchy& hier, const Dataset& data);

// Free variables of the source that act as interventions: the query's do
// variables, or else those never on the left of a term.
std::vector<std::string> infer_do_vars(const Hierarchy& hier, const std::optional<Query>& query);
std::vector<std::string> infer_outcome(const Hierarchy& hier, const std::optional<Query>& query);

EvalReport pi_hte(const Hierarchy& hier, const Dataset& data, const EvalOptions& options = {});

// Divides f by its sum over the outcome variables for every configuration
// of the other variables.
SparseFactor renormalize(const SparseFactor& f, std::span<const VarId> outcome);

// Literal dense evaluation of hier.source with the same empirical factors
// and the do variables pinned. Scope ids match pi_hte's result.
SparseFactor brute_force_eval(const Hierarchy& hier, const Dataset& data,
                              const std::map<std::string, State>& do_assignment = {},
                              double dense_limit = kDefaultDenseLimit);

struct FactorDiff {
  bool same_scope = true;
  double max_abs = 0.0;
  double max_rel = 0.0;  // |a-b| / max(|a|,|b|); 1 where only one side has an entry
  std::size_t cells = 0;  // keys present on either side
};

FactorDiff compare_factors(const SparseFactor& a, const SparseFactor& b);

struct LevelWidths {
  std::size_t n_vars = 0;
  std::uint32_t k = 2;
  std::size_t treewidth = 0;
  std::size_t hyperwidth = 0;
};

struct LevelBound {
  double log10_table_tw = 0.0;  // (w+1) log10 k
  double log10_time_tw = 0.0;   // log10 n + (w+1) log10 k
  std::optional<double> log10_table_hw;  // hw log10 t
  std::optional<double> log10_time_hw;   // log10 max(n hw log2(t) t^hw, n)
};

struct BoundReport {
  std::vector<LevelBound> levels;
  double log10_time_tw = 0.0;  // summed over levels
  std::optional<double> log10_time_hw;
  std::size_t exponent_sum = 0;  // sum of hw over levels
  std::size_t exponent_max = 0;
  std::optional<bool> hw_tighter;
};

// Bounds in log10. Without t only the treewidth side and the exponents are
// filled in.
BoundReport predicted_bounds(std::span<const LevelWidths> levels, std::optional<double> t);

struct AnalyzeOptions {
  unsigned restarts = 1;
  std::uint64_t seed = 0;
  std::map<std::size_t, std::string> decomposition_text;
  std::optional<double> t;  // tightness for the hyperwidth bounds
};

struct LevelAnalysis {
  std::size_t level = 0;
  std::optional<std::size_t> parent;
  std::vector<std::string> factors;  // display form, in factor id order
  std::vector<std::string> sum_vars;
  std::vector<std::string> free_vars;
  Hypergraph hypergraph;
  TreeDecomposition decomposition;
  std::uint32_t k = 1;
};

struct AnalysisReport {
  std::vector<LevelAnalysis> levels;  // by level id
  std::size_t depth = 0;
  std::vector<std::string> warnings;
  BoundReport bounds;  // in level id order
  std::optional<double> t;
};

// Decomposes every level without touching data; domain sizes come from card_of.
AnalysisReport analyze_hierarchy(const Hierarchy& hier,
                                 const std::function<std::uint32_t(const std::string&)>& card_of,
                                 const AnalyzeOptions& options = {});

struct MetricsRow {
  std::size_t samples = 0;
  double time = 0.0;
  std::size_t max_table_size = 0;
  std::size_t t = 0;
  double density = 0.0;
};

MetricsRow run_metrics(const EvalReport& report);

}  // namespace pihte
