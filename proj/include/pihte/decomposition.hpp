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

// Hypergraphs of flattened levels, tree decompositions built from elimination
// orderings, hypertree covers, and validation of the four decomposition
// conditions.
//
// Execution assignment (psi: every factor in exactly one cluster) is kept
// separate from width measurement (cover: hyperedges whose scopes cover chi).
// A cover may reuse a hyperedge that psi places elsewhere.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pihte/estimand.hpp"
#include "pihte/sparse_factor.hpp"

namespace pihte {

using NodeId = std::size_t;
using FactorId = std::size_t;

struct Hypergraph {
  std::vector<std::string> names;          // node names, natural order
  std::vector<std::uint32_t> cards;        // per node
  std::vector<std::vector<NodeId>> edges;  // per factor id, sorted
  std::vector<bool> child_output;          // per factor id
  bool empty_level = false;                // built from a level without factors

  std::size_t num_nodes() const noexcept { return names.size(); }
  std::optional<NodeId> node(std::string_view name) const;
};

Hypergraph build_hypergraph(const FlatLevel& level,
                            const std::function<std::uint32_t(const std::string&)>& card_of);

// Hypergraph from explicit scopes; nodes are the union of the scopes.
Hypergraph make_hypergraph(const std::vector<std::vector<std::string>>& scopes,
                           std::uint32_t card = 2);

struct Cluster {
  std::vector<NodeId> chi;
  std::vector<FactorId> psi;
  std::vector<FactorId> cover;
};

struct TreeEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<NodeId> separator;
};

struct DecompositionStats {
  std::size_t treewidth = 0;
  std::size_t hyperwidth = 0;
  // Cover size when child output functions may not be used; empty when some
  // cluster cannot be covered without them.
  std::optional<std::size_t> hyperwidth_without_child;
  std::size_t max_degree = 0;
  std::size_t n_clusters = 0;
};

struct TreeDecomposition {
  std::vector<Cluster> clusters;
  std::vector<TreeEdge> edges;
  std::size_t root = 0;
  DecompositionStats stats;
  std::string method;  // "gyo", "min-fill" or "file"

  std::vector<std::vector<std::size_t>> adjacency() const;
};

struct GyoResult {
  bool is_hypertree = false;
  std::optional<TreeDecomposition> join_tree;
};

// Ear removal: drops nodes private to one hyperedge and hyperedges contained
// in another until nothing changes. Acyclic iff at most one edge survives.
GyoResult gyo_acyclic(const Hypergraph& h);

// Greedy min-fill on the primal graph. Ties go to (fill, degree, name); with
// randomize_ties, exact (fill, degree) ties are broken by a seeded draw.
std::vector<NodeId> min_fill_order(const Hypergraph& h, std::uint64_t seed,
                                   bool randomize_ties = false);

// Induced width of an elimination ordering on the primal graph.
std::size_t induced_width(const Hypergraph& h, std::span<const NodeId> order);

// Bucket construction: one cluster per eliminated variable (itself plus its
// not-yet-eliminated neighbours), linked to the bucket of the next eliminated
// variable in it. Each factor goes to the bucket of its first eliminated
// variable. Subsumed clusters are merged. Covers are left empty.
TreeDecomposition tree_decomposition(const Hypergraph& h, std::span<const NodeId> order);

// Greedy set cover of every chi; fills cover and the width statistics.
TreeDecomposition hypertree_cover(TreeDecomposition td, const Hypergraph& h);

struct Violation {
  int condition = 0;  // 1..4, or 0 for tree structure / separators
  std::string message;
};

std::vector<Violation> validate(const TreeDecomposition& td, const Hypergraph& h);

// Recomputes separators and stats (widths from the stored covers).
void refresh(TreeDecomposition& td, const Hypergraph& h);

// Root = cluster holding the most of `free_nodes`, ties to the lowest id.
void select_root(TreeDecomposition& td, std::span<const NodeId> free_nodes);

// Text format:
//   cluster <id>: chi={v,...} psi={factor_id,...} cover={factor_id,...}
//   edge <id> <id>
//   root <id>            (optional)
// Factor ids index the level's factor list from 0. A missing cover is
// filled in greedily. Any validation failure throws ValidationError.
TreeDecomposition parse_decomposition(std::string_view text, const Hypergraph& h);
TreeDecomposition load_decomposition(const std::filesystem::path& path, const Hypergraph& h);
std::string format_decomposition(const TreeDecomposition& td, const Hypergraph& h);

struct DecomposeOptions {
  unsigned restarts = 1;
  std::uint64_t seed = 0;
  std::vector<NodeId> free_nodes;
};

// gyo_acyclic when it succeeds, otherwise min-fill with seeded restarts
// keeping the best (hw, then w); then covers and root selection.
TreeDecomposition decompose(const Hypergraph& h, const DecomposeOptions& options = {});

}  // namespace pihte
