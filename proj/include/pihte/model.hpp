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

// Variables, causal graphs, datasets and empirical probabilities.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pihte/sparse_factor.hpp"

namespace pihte {

struct Variable {
  std::string name;
  std::uint32_t domain_size = 1;
};

// Name <-> id registry. Ids are dense and assigned in registration order,
// which is also the canonical scope order of every factor.
class VarSpace {
 public:
  VarSpace() = default;
  explicit VarSpace(std::span<const Variable> vars);

  // Registers a variable; re-registering with the same domain returns the
  // existing id, a different domain throws ScopeConflict.
  VarId add(const std::string& name, std::uint32_t domain_size);

  std::optional<VarId> find(std::string_view name) const;
  // Throws UnknownVariable.
  VarId id(std::string_view name) const;
  const std::string& name(VarId id) const { return vars_.at(id).name; }
  std::uint32_t card(VarId id) const { return vars_.at(id).domain_size; }
  ScopeVar scope_var(VarId id) const { return {id, card(id)}; }
  std::size_t size() const noexcept { return vars_.size(); }
  std::span<const Variable> variables() const noexcept { return vars_; }

 private:
  std::vector<Variable> vars_;
  std::unordered_map<std::string, VarId> index_;
};

struct CausalGraph {
  std::vector<Variable> variables;
  std::vector<std::pair<std::size_t, std::size_t>> directed_edges;    // parent, child
  std::vector<std::pair<std::size_t, std::size_t>> bidirected_edges;  // unordered

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::size_t> parents(std::size_t v) const;
  std::vector<std::size_t> topological_order() const;
  VarSpace var_space() const { return VarSpace(variables); }
};

// Text format, one statement per line, '#' starts a comment:
//   var <name> <domain_size>
//   <a> -> <b>
//   <a> <-> <b>
// Statements may also be separated by ';'.
CausalGraph parse_graph(std::string_view text);
CausalGraph load_graph(const std::filesystem::path& path);
std::string format_graph(const CausalGraph& graph);

struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::uint32_t> domain_sizes;
  std::vector<State> cells;  // row-major, n_rows * columns.size()
  std::size_t n_rows = 0;

  std::optional<std::size_t> column_index(std::string_view name) const;
  State at(std::size_t row, std::size_t col) const {
    return cells[row * columns.size() + col];
  }
};

// RFC-4180 CSV: header row of variable names, integer cells, no missing
// values. Every header name must be a graph variable; cells are
// range-checked against the graph's domain sizes.
Dataset parse_dataset(std::string_view text, const CausalGraph& graph);
Dataset load_dataset(const std::filesystem::path& path, const CausalGraph& graph);
std::string format_dataset(const Dataset& data);

// Number of distinct rows of the projection of `data` onto `columns`.
std::size_t distinct_projection_count(const Dataset& data,
                                      std::span<const std::size_t> columns);

// Binds a dataset column to the factor variable that should carry it. Two
// bindings may read the same column under different variable ids.
struct ColumnBinding {
  std::size_t column = 0;
  ScopeVar var;
};

// P_D(left | right): one entry per observed (l, r) configuration with value
// #D(l, r) / #D(r), or #D(l) / n_rows when right is empty. Counts are exact
// integers; each value is a single division.
SparseFactor empirical_prob(const Dataset& data,
                            std::span<const ColumnBinding> left,
                            std::span<const ColumnBinding> right);

// Convenience overload resolving names through the dataset and `space`.
SparseFactor empirical_prob(const Dataset& data, const VarSpace& space,
                            std::span<const std::string> left,
                            std::span<const std::string> right);

}  // namespace pihte
