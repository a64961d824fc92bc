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

#include "pihte/decomposition.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "pihte/errors.hpp"

namespace pihte {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

template <class T>
bool is_subset(const std::vector<T>& small, const std::vector<T>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

template <class T>
std::vector<T> intersect(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

using Adjacency = std::vector<std::vector<char>>;

Adjacency primal_graph(const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  Adjacency adj(n, std::vector<char>(n, 0));
  for (const auto& e : h.edges) {
    for (NodeId a : e) {
      for (NodeId b : e) {
        if (a != b) adj[a][b] = 1;
      }
    }
  }
  return adj;
}

// Contracts every tree edge whose one endpoint's chi is contained in the
// other's, keeping the larger cluster. Returns the compacted tree.
void merge_subsumed(std::vector<Cluster>& clusters, std::vector<std::pair<std::size_t, std::size_t>>& links,
                    std::size_t& root) {
  const std::size_t n = clusters.size();
  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& [a, b] : links) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<bool> alive(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t u = 0; u < n && !changed; ++u) {
      if (!alive[u]) continue;
      for (std::size_t v : adj[u]) {
        if (!is_subset(clusters[u].chi, clusters[v].chi)) continue;
        auto& psi = clusters[v].psi;
        psi.insert(psi.end(), clusters[u].psi.begin(), clusters[u].psi.end());
        std::sort(psi.begin(), psi.end());
        for (std::size_t w : adj[u]) {
          adj[w].erase(u);
          if (w != v) {
            adj[w].insert(v);
            adj[v].insert(w);
          }
        }
        adj[u].clear();
        alive[u] = false;
        if (root == u) root = v;
        changed = true;
        break;
      }
    }
  }
  std::vector<std::size_t> new_id(n, kNone);
  std::vector<Cluster> kept;
  for (std::size_t u = 0; u < n; ++u) {
    if (alive[u]) {
      new_id[u] = kept.size();
      kept.push_back(std::move(clusters[u]));
    }
  }
  links.clear();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v : adj[u]) {
      if (alive[u] && u < v) links.emplace_back(new_id[u], new_id[v]);
    }
  }
  clusters = std::move(kept);
  root = new_id[root];
}

TreeDecomposition assemble(std::vector<Cluster> clusters,
                           std::vector<std::pair<std::size_t, std::size_t>> links, std::size_t root,
                           const Hypergraph& h) {
  merge_subsumed(clusters, links, root);
  TreeDecomposition td;
  td.clusters = std::move(clusters);
  for (const auto& [a, b] : links) td.edges.push_back({a, b, {}});
  std::sort(td.edges.begin(), td.edges.end(), [](const TreeEdge& x, const TreeEdge& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  td.root = root;
  refresh(td, h);
  return td;
}

// Greedy set cover of chi; largest residual intersection first, ties to the
// lowest factor id. Empty optional if some node cannot be covered.
std::optional<std::vector<FactorId>> greedy_cover(const std::vector<NodeId>& chi, const Hypergraph& h,
                                                  bool allow_child_outputs) {
  std::vector<NodeId> residual = chi;
  std::vector<FactorId> cover;
  while (!residual.empty()) {
    std::size_t best = kNone;
    std::size_t best_gain = 0;
    for (FactorId f = 0; f < h.edges.size(); ++f) {
      if (!allow_child_outputs && h.child_output[f]) continue;
      const std::size_t gain = intersect(h.edges[f], residual).size();
      if (gain > best_gain) {
        best_gain = gain;
        best = f;
      }
    }
    if (best == kNone) return std::nullopt;
    cover.push_back(best);
    std::vector<NodeId> rest;
    std::set_difference(residual.begin(), residual.end(), h.edges[best].begin(), h.edges[best].end(),
                        std::back_inserter(rest));
    residual = std::move(rest);
  }
  std::sort(cover.begin(), cover.end());
  return cover;
}

std::string node_list(const std::vector<NodeId>& nodes, const Hypergraph& h) {
  std::string out;
  for (NodeId v : nodes) {
    if (!out.empty()) out += ',';
    out += v < h.num_nodes() ? h.names[v] : "#" + std::to_string(v);
  }
  return out;
}

std::string id_list(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i : ids) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

}  // namespace

std::optional<NodeId> Hypergraph::node(std::string_view name) const {
  for (NodeId i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

Hypergraph build_hypergraph(const FlatLevel& level,
                            const std::function<std::uint32_t(const std::string&)>& card_of) {
  std::vector<std::string> names;
  for (const auto& f : level.factors) names.insert(names.end(), f.scope.begin(), f.scope.end());
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return natural_less(a, b); });
  names.erase(std::unique(names.begin(), names.end()), names.end());

  Hypergraph h;
  h.names = names;
  for (const auto& n : names) h.cards.push_back(card_of(n));
  for (const auto& f : level.factors) {
    std::vector<NodeId> e;
    for (const auto& v : f.scope) e.push_back(*h.node(v));
    std::sort(e.begin(), e.end());
    h.edges.push_back(std::move(e));
    h.child_output.push_back(f.kind == LevelFactor::Kind::kChildOutput);
  }
  h.empty_level = level.factors.empty();
  return h;
}

Hypergraph make_hypergraph(const std::vector<std::vector<std::string>>& scopes, std::uint32_t card) {
  FlatLevel level;
  for (const auto& s : scopes) {
    LevelFactor f;
    f.term.left = s;
    f.scope = s;
    level.factors.push_back(std::move(f));
  }
  return build_hypergraph(level, [card](const std::string&) { return card; });
}

std::vector<std::vector<std::size_t>> TreeDecomposition::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(clusters.size());
  for (const auto& e : edges) {
    if (e.a < clusters.size() && e.b < clusters.size()) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

GyoResult gyo_acyclic(const Hypergraph& h) {
  const std::size_t m = h.edges.size();
  GyoResult result;
  if (m == 0) {
    result.is_hypertree = true;
    TreeDecomposition td;
    td.clusters.emplace_back();
    td.method = "gyo";
    refresh(td, h);
    result.join_tree = std::move(td);
    return result;
  }
  std::vector<std::vector<NodeId>> reduced = h.edges;
  std::vector<bool> alive(m, true);
  std::vector<std::size_t> parent(m, kNone);
  std::vector<std::size_t> count(h.num_nodes(), 0);
  for (const auto& e : reduced) {
    for (NodeId v : e) ++count[v];
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      auto& e = reduced[i];
      const auto old = e.size();
      e.erase(std::remove_if(e.begin(), e.end(), [&](NodeId v) { return count[v] == 1; }), e.end());
      if (e.size() != old) changed = true;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i || !alive[j] || !is_subset(reduced[i], reduced[j])) continue;
        if (reduced[i] == reduced[j] && j > i) continue;  // keep the lower id of equal pairs
        alive[i] = false;
        parent[i] = j;
        for (NodeId v : reduced[i]) --count[v];
        changed = true;
        break;
      }
    }
  }
  const auto survivors = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
  result.is_hypertree = survivors <= 1;
  if (!result.is_hypertree) return result;

  std::vector<Cluster> clusters(m);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::size_t root = 0;
  for (std::size_t i = 0; i < m; ++i) {
    clusters[i].chi = h.edges[i];
    clusters[i].psi = {i};
    clusters[i].cover = {i};
    if (parent[i] == kNone) {
      root = i;
    } else {
      links.emplace_back(std::min(i, parent[i]), std::max(i, parent[i]));
    }
  }
  TreeDecomposition td = assemble(std::move(clusters), std::move(links), root, h);
  td.method = "gyo";
  result.join_tree = std::move(td);
  return result;
}

std::vector<NodeId> min_fill_order(const Hypergraph& h, std::uint64_t seed, bool randomize_ties) {
  const std::size_t n = h.num_nodes();
  Adjacency adj = primal_graph(h);
  std::vector<bool> done(n, false);
  std::vector<NodeId> order;
  std::mt19937_64 rng(seed);
  std::vector<NodeId> nbrs;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best_fill = kNone;
    std::size_t best_deg = kNone;
    std::vector<NodeId> tied;
    for (NodeId v = 0; v < n; ++v) {
      if (done[v]) continue;
      nbrs.clear();
      for (NodeId u = 0; u < n; ++u) {
        if (!done[u] && adj[v][u]) nbrs.push_back(u);
      }
      std::size_t fill = 0;
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
          if (!adj[nbrs[i]][nbrs[j]]) ++fill;
        }
      }
      const std::size_t deg = nbrs.size();
      if (fill < best_fill || (fill == best_fill && deg < best_deg)) {
        best_fill = fill;
        best_deg = deg;
        tied.assign(1, v);
      } else if (fill == best_fill && deg == best_deg) {
        tied.push_back(v);
      }
    }
    NodeId pick = *std::min_element(tied.begin(), tied.end(), [&](NodeId a, NodeId b) {
      return natural_less(h.names[a], h.names[b]);
    });
    if (randomize_ties && tied.size() > 1) {
      std::uniform_int_distribution<std::size_t> dist(0, tied.size() - 1);
      pick = tied[dist(rng)];
    }
    nbrs.clear();
    for (NodeId u = 0; u < n; ++u) {
      if (!done[u] && adj[pick][u]) nbrs.push_back(u);
    }
    for (NodeId a : nbrs) {
      for (NodeId b : nbrs) {
        if (a != b) adj[a][b] = 1;
      }
    }
    done[pick] = true;
    order.push_back(pick);
  }
  return order;
}

std::size_t induced_width(const Hypergraph& h, std::span<const NodeId> order) {
  const std::size_t n = h.num_nodes();
  Adjacency adj = primal_graph(h);
  std::vector<bool> done(n, false);
  std::size_t width = 0;
  for (NodeId v : order) {
    std::vector<NodeId> nbrs;
    for (NodeId u = 0; u < n; ++u) {
      if (!done[u] && adj[v][u]) nbrs.push_back(u);
    }
    width = std::max(width, nbrs.size());
    for (NodeId a : nbrs) {
      for (NodeId b : nbrs) {
        if (a != b) adj[a][b] = 1;
      }
    }
    done[v] = true;
  }
  return width;
}

TreeDecomposition tree_decomposition(const Hypergraph& h, std::span<const NodeId> order) {
  const std::size_t n = h.num_nodes();
  if (order.size() != n) throw std::invalid_argument("elimination order does not cover every node");
  std::vector<std::size_t> pos(n, kNone);
  for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;
  if (std::count(pos.begin(), pos.end(), kNone) != 0) {
    throw std::invalid_argument("elimination order repeats a node");
  }

  if (n == 0) {
    std::vector<Cluster> clusters(1);
    clusters[0].psi.resize(h.edges.size());
    std::iota(clusters[0].psi.begin(), clusters[0].psi.end(), FactorId{0});
    TreeDecomposition td = assemble(std::move(clusters), {}, 0, h);
    td.method = "min-fill";
    return td;
  }

  Adjacency adj = primal_graph(h);
  std::vector<bool> done(n, false);
  std::vector<Cluster> clusters(n);
  std::vector<std::size_t> parent(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = order[i];
    std::vector<NodeId> nbrs;
    for (NodeId u = 0; u < n; ++u) {
      if (!done[u] && adj[v][u]) nbrs.push_back(u);
    }
    for (NodeId a : nbrs) {
      for (NodeId b : nbrs) {
        if (a != b) adj[a][b] = 1;
      }
    }
    done[v] = true;
    clusters[i].chi = nbrs;
    clusters[i].chi.push_back(v);
    std::sort(clusters[i].chi.begin(), clusters[i].chi.end());
    std::size_t next = kNone;
    for (NodeId u : nbrs) next = std::min(next, pos[u]);
    parent[i] = next;
  }

  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i] == kNone) roots.push_back(i);
  }
  const std::size_t root = roots.back();
  for (std::size_t r : roots) {
    if (r != root) parent[r] = root;
  }
  for (FactorId f = 0; f < h.edges.size(); ++f) {
    std::size_t first = root;
    if (!h.edges[f].empty()) {
      first = kNone;
      for (NodeId v : h.edges[f]) first = std::min(first, pos[v]);
    }
    clusters[first].psi.push_back(f);
  }
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i] != kNone) links.emplace_back(std::min(i, parent[i]), std::max(i, parent[i]));
  }
  TreeDecomposition td = assemble(std::move(clusters), std::move(links), root, h);
  td.method = "min-fill";
  return td;
}

TreeDecomposition hypertree_cover(TreeDecomposition td, const Hypergraph& h) {
  for (std::size_t c = 0; c < td.clusters.size(); ++c) {
    auto cover = greedy_cover(td.clusters[c].chi, h, /*allow_child_outputs=*/true);
    if (!cover) {
      throw UncoverableCluster("cluster " + std::to_string(c) + " {" +
                               node_list(td.clusters[c].chi, h) + "} is not covered by any hyperedges");
    }
    td.clusters[c].cover = std::move(*cover);
  }
  refresh(td, h);
  return td;
}

void refresh(TreeDecomposition& td, const Hypergraph& h) {
  for (auto& e : td.edges) {
    if (e.a < td.clusters.size() && e.b < td.clusters.size()) {
      e.separator = intersect(td.clusters[e.a].chi, td.clusters[e.b].chi);
    }
  }
  DecompositionStats s;
  s.n_clusters = td.clusters.size();
  std::size_t max_chi = 0;
  bool has_child = std::find(h.child_output.begin(), h.child_output.end(), true) != h.child_output.end();
  std::optional<std::size_t> without = 0;
  for (const auto& c : td.clusters) {
    max_chi = std::max(max_chi, c.chi.size());
    s.hyperwidth = std::max(s.hyperwidth, c.cover.size());
    if (has_child && without) {
      auto cover = greedy_cover(c.chi, h, /*allow_child_outputs=*/false);
      without = cover ? std::optional(std::max(*without, cover->size())) : std::nullopt;
    }
  }
  s.treewidth = max_chi == 0 ? 0 : max_chi - 1;
  s.hyperwidth_without_child = has_child ? without : std::optional(s.hyperwidth);
  for (const auto& a : td.adjacency()) s.max_degree = std::max(s.max_degree, a.size());
  td.stats = s;
}

std::vector<Violation> validate(const TreeDecomposition& td, const Hypergraph& h) {
  std::vector<Violation> out;
  const std::size_t m = td.clusters.size();
  if (m == 0) {
    out.push_back({0, "decomposition has no clusters"});
    return out;
  }
  if (td.root >= m) out.push_back({0, "root " + std::to_string(td.root) + " is not a cluster"});
  for (const auto& e : td.edges) {
    if (e.a >= m || e.b >= m || e.a == e.b) {
      out.push_back({0, "edge " + std::to_string(e.a) + "-" + std::to_string(e.b) + " is invalid"});
    } else if (e.separator != intersect(td.clusters[e.a].chi, td.clusters[e.b].chi)) {
      out.push_back({0, "edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                            " separator differs from the chi intersection"});
    }
  }
  if (!out.empty()) return out;
  if (td.edges.size() != m - 1) {
    out.push_back({0, "tree over " + std::to_string(m) + " clusters needs " + std::to_string(m - 1) +
                          " edges, found " + std::to_string(td.edges.size())});
  }
  const auto adj = td.adjacency();
  {
    std::vector<bool> seen(m, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++reached;
          stack.push_back(v);
        }
      }
    }
    if (reached != m) out.push_back({0, "cluster tree is not connected"});
  }

  // Condition 1: every factor in exactly one psi.
  std::vector<std::size_t> owner_count(h.edges.size(), 0);
  for (std::size_t c = 0; c < m; ++c) {
    for (FactorId f : td.clusters[c].psi) {
      if (f >= h.edges.size()) {
        out.push_back({1, "cluster " + std::to_string(c) + " lists unknown factor " + std::to_string(f)});
        continue;
      }
      ++owner_count[f];
      // Condition 2: the factor's scope fits its cluster.
      if (!is_subset(h.edges[f], td.clusters[c].chi)) {
        out.push_back({2, "factor " + std::to_string(f) + " {" + node_list(h.edges[f], h) +
                              "} is not contained in chi of cluster " + std::to_string(c)});
      }
    }
  }
  for (FactorId f = 0; f < h.edges.size(); ++f) {
    if (owner_count[f] != 1) {
      out.push_back({1, "factor " + std::to_string(f) + " is assigned to " + std::to_string(owner_count[f]) +
                            " clusters"});
    }
  }

  // Condition 3: running intersection.
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    std::vector<std::size_t> holding;
    for (std::size_t c = 0; c < m; ++c) {
      if (std::binary_search(td.clusters[c].chi.begin(), td.clusters[c].chi.end(), v)) holding.push_back(c);
    }
    if (holding.size() <= 1) continue;
    std::vector<bool> in(m, false);
    for (std::size_t c : holding) in[c] = true;
    std::vector<bool> seen(m, false);
    std::vector<std::size_t> stack{holding[0]};
    seen[holding[0]] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t w : adj[u]) {
        if (in[w] && !seen[w]) {
          seen[w] = true;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    if (reached != holding.size()) {
      out.push_back({3, "clusters containing '" + h.names[v] + "' do not form a connected subtree"});
    }
  }

  // Condition 4: chi covered by the cover's scopes.
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<NodeId> covered;
    for (FactorId f : td.clusters[c].cover) {
      if (f >= h.edges.size()) {
        out.push_back({4, "cluster " + std::to_string(c) + " cover lists unknown factor " + std::to_string(f)});
        continue;
      }
      covered.insert(covered.end(), h.edges[f].begin(), h.edges[f].end());
    }
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    std::vector<NodeId> missing;
    std::set_difference(td.clusters[c].chi.begin(), td.clusters[c].chi.end(), covered.begin(), covered.end(),
                        std::back_inserter(missing));
    if (!missing.empty()) {
      out.push_back({4, "cluster " + std::to_string(c) + " has {" + node_list(missing, h) +
                            "} outside its cover"});
    }
  }
  return out;
}

void select_root(TreeDecomposition& td, std::span<const NodeId> free_nodes) {
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t c = 0; c < td.clusters.size(); ++c) {
    std::size_t count = 0;
    for (NodeId v : free_nodes) {
      if (std::binary_search(td.clusters[c].chi.begin(), td.clusters[c].chi.end(), v)) ++count;
    }
    if (count > best_count) {
      best = c;
      best_count = count;
    }
  }
  td.root = best;
}

TreeDecomposition parse_decomposition(std::string_view text, const Hypergraph& h) {
  static const std::regex cluster_re(R"(^\s*cluster\s+([^\s:]+)\s*:(.*)$)");
  static const std::regex field_re(R"((chi|psi|cover)\s*=\s*\{([^}]*)\})");
  static const std::regex edge_re(R"(^\s*edge\s+(\S+)\s+(\S+)\s*$)");
  static const std::regex root_re(R"(^\s*root\s+(\S+)\s*$)");

  auto items = [](const std::string& list) {
    std::vector<std::string> out;
    std::istringstream is(list);
    std::string item;
    while (std::getline(is, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  };
  auto factor_id = [&](const std::string& s, std::size_t line) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) {
      throw ParseError("line " + std::to_string(line) + ": bad factor id '" + s + "'");
    }
    return static_cast<FactorId>(v);
  };

  TreeDecomposition td;
  td.method = "file";
  std::map<std::string, std::size_t> index;
  std::vector<std::pair<std::string, std::string>> pending_edges;
  std::optional<std::string> root_label;
  std::vector<bool> has_cover;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, cluster_re)) {
      const std::string label = m[1];
      if (index.count(label)) throw ParseError("line " + std::to_string(line_no) + ": cluster " + label + " repeated");
      Cluster c;
      bool cover_given = false;
      const std::string rest = m[2];
      for (auto it = std::sregex_iterator(rest.begin(), rest.end(), field_re); it != std::sregex_iterator(); ++it) {
        const std::string field = (*it)[1];
        for (const auto& item : items((*it)[2])) {
          if (field == "chi") {
            auto v = h.node(item);
            if (!v) throw UnknownVariable("line " + std::to_string(line_no) + ": '" + item + "' is not in the level");
            c.chi.push_back(*v);
          } else if (field == "psi") {
            c.psi.push_back(factor_id(item, line_no));
          } else {
            c.cover.push_back(factor_id(item, line_no));
          }
        }
        if (field == "cover") cover_given = true;
      }
      std::sort(c.chi.begin(), c.chi.end());
      c.chi.erase(std::unique(c.chi.begin(), c.chi.end()), c.chi.end());
      std::sort(c.psi.begin(), c.psi.end());
      std::sort(c.cover.begin(), c.cover.end());
      index[label] = td.clusters.size();
      td.clusters.push_back(std::move(c));
      has_cover.push_back(cover_given);
    } else if (std::regex_match(line, m, edge_re)) {
      pending_edges.emplace_back(m[1], m[2]);
    } else if (std::regex_match(line, m, root_re)) {
      root_label = m[1];
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unrecognized '" + line + "'");
    }
  }
  auto lookup = [&](const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw ParseError("unknown cluster '" + label + "'");
    return it->second;
  };
  for (const auto& [a, b] : pending_edges) td.edges.push_back({lookup(a), lookup(b), {}});
  td.root = root_label ? lookup(*root_label) : 0;
  for (std::size_t c = 0; c < td.clusters.size(); ++c) {
    if (!has_cover[c]) {
      auto cover = greedy_cover(td.clusters[c].chi, h, true);
      if (cover) td.clusters[c].cover = std::move(*cover);
    }
  }
  refresh(td, h);
  const auto violations = validate(td, h);
  if (!violations.empty()) {
    std::string msg = "decomposition rejected:";
    for (const auto& v : violations) {
      msg += "\n  " + (v.condition == 0 ? std::string("tree") : "condition " + std::to_string(v.condition)) +
             ": " + v.message;
    }
    throw ValidationError(msg);
  }
  return td;
}

TreeDecomposition load_decomposition(const std::filesystem::path& path, const Hypergraph& h) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_decomposition(os.str(), h);
}

std::string format_decomposition(const TreeDecomposition& td, const Hypergraph& h) {
  std::ostringstream os;
  for (std::size_t c = 0; c < td.clusters.size(); ++c) {
    const auto& cl = td.clusters[c];
    os << "cluster " << c << ": chi={" << node_list(cl.chi, h) << "} psi={" << id_list(cl.psi) << "} cover={"
       << id_list(cl.cover) << "}\n";
  }
  for (const auto& e : td.edges) os << "edge " << e.a << ' ' << e.b << '\n';
  os << "root " << td.root << '\n';
  return os.str();
}

TreeDecomposition decompose(const Hypergraph& h, const DecomposeOptions& options) {
  TreeDecomposition best;
  GyoResult gyo = gyo_acyclic(h);
  if (gyo.is_hypertree) {
    best = hypertree_cover(std::move(*gyo.join_tree), h);
    best.method = "gyo";
  } else {
    const unsigned runs = std::max(1u, options.restarts);
    bool have = false;
    for (unsigned r = 0; r < runs; ++r) {
      const auto order = min_fill_order(h, options.seed + r, /*randomize_ties=*/r > 0);
      TreeDecomposition td = hypertree_cover(tree_decomposition(h, order), h);
      const auto key = std::pair(td.stats.hyperwidth, td.stats.treewidth);
      if (!have || key < std::pair(best.stats.hyperwidth, best.stats.treewidth)) {
        best = std::move(td);
        have = true;
      }
    }
    best.method = "min-fill";
  }
  select_root(best, options.free_nodes);
  return best;
}

}  // namespace pihte
