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

// Relational (zero-suppressed) factors and the algebra needed by cluster-tree
// elimination: product, marginalization, inversion and restriction.
//
// A factor stores one row per non-zero assignment of its scope. Scopes are
// kept sorted by variable id, which is the global variable order, and rows
// are kept sorted lexicographically in scope order. Keys are fixed-width
// integer tuples so iteration order is fully deterministic.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pihte {

using VarId = std::uint32_t;
using State = std::uint32_t;

inline constexpr State kUnassigned = std::numeric_limits<State>::max();

// Values below this magnitude are treated as underflow and dropped.
inline constexpr double kUnderflowFloor = 1e-300;

struct ScopeVar {
  VarId id = 0;
  std::uint32_t card = 1;

  friend auto operator<=>(const ScopeVar&, const ScopeVar&) = default;
};

struct FactorStats {
  std::size_t tightness = 0;
  double density = 0.0;
};

class SparseFactor {
 public:
  // The multiplicative identity: empty scope, single entry 1.0.
  SparseFactor();

  static SparseFactor scalar(double value);

  // Builds a factor from rows given in the column order of `scope`. Columns
  // are permuted into id order and rows sorted. Zero (or underflowing) values
  // are dropped. Throws ScopeConflict on a repeated variable and
  // std::invalid_argument on duplicate keys or out-of-domain states.
  static SparseFactor from_rows(std::vector<ScopeVar> scope,
                                std::span<const State> keys,
                                std::span<const double> values);

  std::span<const ScopeVar> scope() const noexcept { return scope_; }
  std::size_t width() const noexcept { return scope_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const State> key(std::size_t row) const noexcept {
    return {keys_.data() + row * scope_.size(), scope_.size()};
  }
  double value(std::size_t row) const noexcept { return values_[row]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const State> keys() const noexcept { return keys_; }

  bool has_var(VarId id) const noexcept;
  // Position of `id` in the scope, or width() when absent.
  std::size_t position(VarId id) const noexcept;

  // Stored value for a key given in scope order, 0 when absent.
  double lookup(std::span<const State> key) const;

  double total() const;

  friend bool operator==(const SparseFactor&, const SparseFactor&) = default;

 private:
  friend class FactorBuilder;
  std::vector<ScopeVar> scope_;
  std::vector<State> keys_;
  std::vector<double> values_;
};

// Appends rows in canonical scope order, then sorts once.
class FactorBuilder {
 public:
  explicit FactorBuilder(std::vector<ScopeVar> sorted_scope);
  void reserve(std::size_t rows);
  // key must be in scope order; zero values are skipped.
  void add(std::span<const State> key, double value);
  // Rows already added in ascending key order skip the final sort.
  SparseFactor finish(bool already_sorted = false) &&;

 private:
  SparseFactor out_;
};

struct ProductLimits {
  std::size_t max_entries = std::numeric_limits<std::size_t>::max();
};

struct ProductDiagnostics {
  // Rows of the left operand that found no partner in the right operand.
  std::size_t unmatched_left = 0;
};

SparseFactor product(const SparseFactor& f, const SparseFactor& g,
                     const ProductLimits& limits = {},
                     ProductDiagnostics* diagnostics = nullptr);

// Sums out `out_vars`; throws UnknownVariable if one is not in scope.
SparseFactor marginalize(const SparseFactor& f, std::span<const VarId> out_vars);

// Sums out every variable not in `keep`. Variables of `keep` outside the
// scope are ignored.
SparseFactor project(const SparseFactor& f, std::span<const VarId> keep);

SparseFactor invert(const SparseFactor& f);

// Keeps the rows with var == state; the variable stays in scope.
SparseFactor restrict_to(const SparseFactor& f, VarId var, State state);

// Replaces variable ids according to `relabel` (identity for ids not
// mapped) and re-canonicalizes.
SparseFactor relabel(const SparseFactor& f,
                     const std::function<VarId(VarId)>& relabel);

// `assignment` is indexed by VarId; entries for scope variables must not be
// kUnassigned (IncompleteAssignment otherwise).
double dense_eval(const SparseFactor& f, std::span<const State> assignment);

FactorStats stats(const SparseFactor& f);

// Number of dense configurations of the scope, as a double (may be huge).
double dense_size(std::span<const ScopeVar> scope);

// Count of rows dropped because their value fell below kUnderflowFloor,
// accumulated across all factor operations in the process.
std::size_t underflow_drop_count() noexcept;
void reset_underflow_drop_count() noexcept;

// Debug text: a header "scope: name:card,..." then "v1,v2,...=value" rows.
std::string to_debug_string(
    const SparseFactor& f,
    const std::function<std::string(VarId)>& name_of);
SparseFactor from_debug_string(
    const std::string& text,
    const std::function<VarId(const std::string&)>& id_of);

std::vector<ScopeVar> scope_union(std::span<const ScopeVar> a,
                                  std::span<const ScopeVar> b);

}  // namespace pihte
