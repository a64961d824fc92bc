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

// Slow reference implementations used to check the library. Nothing here
// calls the library's own algebra: tables are plain maps from full
// assignments to values and every operation enumerates cells directly.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pihte/decomposition.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "pihte/sparse_factor.hpp"

namespace pihte::oracle {

using Rng = std::mt19937_64;

// Dense table: variables in ascending id order and every non-zero cell.
struct Table {
  std::vector<ScopeVar> vars;
  std::map<std::vector<State>, double> cells;
};

Table from_factor(const SparseFactor& f);

// Value of f at a full assignment, by a linear scan over its rows.
double value_at(const SparseFactor& f, const std::map<VarId, State>& assignment);

// Every assignment of `vars` in lexicographic order.
std::vector<std::vector<State>> all_assignments(const std::vector<ScopeVar>& vars);

Table product(const SparseFactor& f, const SparseFactor& g);
Table marginalize(const SparseFactor& f, const std::vector<VarId>& out);

struct Diff {
  bool same_vars = true;
  double max_abs = 0.0;
  double max_rel = 0.0;
};

Diff compare(const SparseFactor& f, const Table& t);
Diff compare(const Table& a, const Table& b);

// Random factor over a random subset of `pool` (at most max_width
// variables); each cell is kept with probability fill.
SparseFactor random_factor(Rng& rng, const std::vector<ScopeVar>& pool, std::size_t max_width, double fill);

// Random factor over exactly `scope`.
SparseFactor random_factor_over(Rng& rng, std::vector<ScopeVar> scope, double fill, double lo = 0.05,
                                double hi = 1.0);

// n nodes named N0.. and m edges of 1..max_edge nodes; every node is used.
Hypergraph random_hypergraph(Rng& rng, std::size_t n, std::size_t m, std::size_t max_edge);

// Random estimand text over V0..V(n_vars-1) with at most max_depth nested
// sums and at most one ratio.
std::string random_expression(Rng& rng, std::size_t n_vars, std::size_t max_depth);

// Positive random factors for every term of e, keyed like bind_empirical.
Bindings random_bindings(Rng& rng, const Expr& e, const VarSpace& space);

// Bottom-up dense evaluation of a flattened hierarchy: at every level each
// assignment of sum and free variables multiplies the level's terms and
// divides by its child outputs (0/0 gives 0). Keys follow the root's free
// variables sorted by base-name id.
Table evaluate_hierarchy(const Hierarchy& hier, const Bindings& bindings, const VarSpace& space);

// Dense table of dense_expr_eval over the free variables of e, in the same
// layout as evaluate_hierarchy.
Table evaluate_expr(const Expr& e, const Bindings& bindings, const VarSpace& space);

// Dataset with the given columns and rows.
Dataset make_dataset(const std::vector<std::string>& columns, const std::vector<std::uint32_t>& cards,
                     const std::vector<std::vector<State>>& rows);

// Every pair of clusters joined by a tree path holding variable v must all
// contain v (running intersection), checked by brute force over paths.
bool running_intersection(const TreeDecomposition& td, std::size_t num_nodes);

}  // namespace pihte::oracle
