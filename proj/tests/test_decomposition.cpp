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

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "pihte/decomposition.hpp"
#include "pihte/errors.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"

using namespace pihte;

namespace {

const std::string kFixtures = PIHTE_FIXTURE_DIR;

std::string read(const std::string& name) {
  std::ifstream in(kFixtures + "/" + name);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Fixture {
  CausalGraph graph;
  Hierarchy hier;
  Hypergraph level(std::size_t id) const {
    return build_hypergraph(hier.levels.at(id), [&](const std::string& n) {
      return graph.variables[*graph.index_of(base_name(n))].domain_size;
    });
  }
};

Fixture fixture(const std::string& stem) {
  return {load_graph(kFixtures + "/" + stem + ".graph"),
          flatten(parse_estimand(read(stem + ".est")).expr)};
}

std::vector<std::string> edge_names(const Hypergraph& h, FactorId f) {
  std::vector<std::string> out;
  for (NodeId n : h.edges[f]) out.push_back(h.names[n]);
  return out;
}

// Elimination game on the primal graph, written out independently.
std::size_t width_of_order(const Hypergraph& h, const std::vector<NodeId>& order) {
  const std::size_t n = h.num_nodes();
  std::vector<std::set<NodeId>> adj(n);
  for (const auto& e : h.edges) {
    for (NodeId a : e) {
      for (NodeId b : e) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  std::vector<bool> gone(n, false);
  std::size_t width = 0;
  for (NodeId v : order) {
    std::vector<NodeId> nb;
    for (NodeId u : adj[v]) {
      if (!gone[u]) nb.push_back(u);
    }
    width = std::max(width, nb.size());
    for (NodeId a : nb) {
      for (NodeId b : nb) {
        if (a != b) adj[a].insert(b);
      }
    }
    gone[v] = true;
  }
  return width;
}

std::size_t count_condition(const std::vector<Violation>& v, int condition) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](const Violation& x) { return x.condition == condition; }));
}

}  // namespace

TEST_SUITE("decomposition") {
  TEST_CASE("napkin child level hyperedges") {
    const auto fx = fixture("napkin");
    const auto& root = fx.hier.levels[fx.hier.root];
    const Hypergraph h = fx.level(root.children[0]);
    REQUIRE(h.edges.size() == 2);
    CHECK(edge_names(h, 0) == std::vector<std::string>{"R", "W'", "X"});
    CHECK(edge_names(h, 1) == std::vector<std::string>{"W'"});
  }

  TEST_CASE("chain-7 hyperedges follow the flattened scopes") {
    const auto fx = fixture("chain7");
    const Hypergraph h = fx.level(0);
    REQUIRE(h.edges.size() == 7);
    CHECK(h.num_nodes() == 8);
    CHECK(edge_names(h, 0) == std::vector<std::string>{"V0", "V1", "V2", "V3", "V4", "V5"});
    CHECK(edge_names(h, 6) == std::vector<std::string>{"V0'"});
  }

  TEST_CASE("empty level is flagged") {
    FlatLevel empty;
    const Hypergraph h = build_hypergraph(empty, [](const std::string&) { return 2u; });
    CHECK(h.empty_level);
    CHECK(h.edges.empty());
  }

  TEST_CASE("acyclicity") {
    CHECK(gyo_acyclic(fixture("chain7").level(0)).is_hypertree);
    CHECK_FALSE(gyo_acyclic(fixture("cone_cloud").level(0)).is_hypertree);
    const auto single = gyo_acyclic(make_hypergraph({{"A", "B", "C"}}));
    REQUIRE(single.is_hypertree);
    CHECK(single.join_tree->clusters.size() == 1);
    CHECK_FALSE(gyo_acyclic(make_hypergraph({{"A", "B"}, {"B", "C"}, {"A", "C"}})).is_hypertree);
  }

  TEST_CASE("gyo join tree of chain-7") {
    const Hypergraph h = fixture("chain7").level(0);
    const auto r = gyo_acyclic(h);
    REQUIRE(r.join_tree);
    TreeDecomposition td = hypertree_cover(*r.join_tree, h);
    CHECK(td.stats.hyperwidth == 1);
    CHECK(validate(td, h).empty());
  }

  TEST_CASE("min-fill on a path eliminates an endpoint first") {
    const Hypergraph h = make_hypergraph({{"A", "B"}, {"B", "C"}});
    const auto order = min_fill_order(h, 0);
    CHECK(order.front() != *h.node("B"));
    CHECK(induced_width(h, order) == 1);
  }

  TEST_CASE("complete graph on four nodes has width 3") {
    const Hypergraph h = make_hypergraph({{"A", "B"}, {"A", "C"}, {"A", "D"}, {"B", "C"}, {"B", "D"}, {"C", "D"}});
    const auto order = min_fill_order(h, 0);
    CHECK(induced_width(h, order) == 3);
    const auto td = hypertree_cover(tree_decomposition(h, order), h);
    CHECK(td.stats.treewidth == 3);
    CHECK(validate(td, h).empty());
  }

  TEST_CASE("chain-7 minimum induced width is 6") {
    const Hypergraph h = fixture("chain7").level(0);
    std::vector<NodeId> order(h.num_nodes());
    std::iota(order.begin(), order.end(), 0);
    std::size_t best = h.num_nodes();
    do {
      best = std::min(best, width_of_order(h, order));
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(best == 6);
    const auto mf = min_fill_order(h, 0);
    CHECK(induced_width(h, mf) == 6);
    CHECK(width_of_order(h, mf) == 6);
  }

  TEST_CASE("induced width agrees with the elimination game") {
    oracle::Rng rng(17);
    for (int i = 0; i < 50; ++i) {
      const Hypergraph h = oracle::random_hypergraph(rng, 7, 5, 3);
      std::vector<NodeId> order(h.num_nodes());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      CHECK(induced_width(h, order) == width_of_order(h, order));
    }
  }

  TEST_CASE("single factor gives a single cluster") {
    const Hypergraph h = make_hypergraph({{"A", "B"}});
    const auto td = hypertree_cover(tree_decomposition(h, min_fill_order(h, 0)), h);
    REQUIRE(td.clusters.size() == 1);
    CHECK(td.stats.treewidth == 1);
    CHECK(td.stats.hyperwidth == 1);
  }

  TEST_CASE("chain-7 elimination decomposition") {
    const Hypergraph h = fixture("chain7").level(0);
    const auto td = hypertree_cover(tree_decomposition(h, min_fill_order(h, 0)), h);
    CHECK(validate(td, h).empty());
    CHECK(td.stats.treewidth == 6);
    CHECK(td.stats.hyperwidth == 1);
  }

  TEST_CASE("cone-cloud has a 15-variable cluster") {
    const Hypergraph h = fixture("cone_cloud").level(0);
    const auto td = decompose(h);
    CHECK(validate(td, h).empty());
    CHECK(td.stats.treewidth == 14);
    CHECK(td.stats.hyperwidth <= 3);
    CHECK(td.method == "min-fill");
  }

  TEST_CASE("heuristic widths on the fixtures") {
    const auto chain = fixture("chain7");
    const auto td = decompose(chain.level(0));
    CHECK(td.stats.hyperwidth == 1);
    CHECK(td.stats.treewidth == 6);
    CHECK(td.method == "gyo");
    const auto napkin = fixture("napkin");
    for (std::size_t l = 0; l < napkin.hier.levels.size(); ++l) {
      CHECK(decompose(napkin.level(l)).stats.hyperwidth == 1);
    }
  }

  TEST_CASE("shipped decomposition files") {
    const auto cone = fixture("cone_cloud");
    const Hypergraph hc = cone.level(0);
    const auto hw2 = load_decomposition(kFixtures + "/cone_cloud_hw2.td", hc);
    CHECK(hw2.stats.hyperwidth == 2);
    CHECK(hw2.stats.treewidth == 14);
    CHECK(hw2.method == "file");
    CHECK(validate(hw2, hc).empty());
    bool has15 = false;
    for (const auto& c : hw2.clusters) has15 = has15 || c.chi.size() == 15;
    CHECK(has15);

    const Hypergraph h7 = fixture("chain7").level(0);
    const auto td7 = load_decomposition(kFixtures + "/chain7.td", h7);
    CHECK(td7.stats.hyperwidth == 1);
    CHECK(td7.stats.treewidth == 6);
  }

  TEST_CASE("file with a broken running intersection is rejected") {
    const Hypergraph h = make_hypergraph({{"A", "B"}, {"B", "C"}, {"C", "A"}});
    const std::string text =
        "cluster 0: chi={A,B} psi={0}\n"
        "cluster 1: chi={B,C} psi={1}\n"
        "cluster 2: chi={C,A} psi={2}\n"
        "edge 0 1\n"
        "edge 1 2\n";
    CHECK_THROWS_AS(parse_decomposition(text, h), ValidationError);
    CHECK_THROWS_AS(parse_decomposition("cluster 0: chi={A,B,C} psi={0,1,2}\nedge 0 0\n", h), ValidationError);
    CHECK_THROWS_AS(parse_decomposition("cluster 0: chi={A,Q} psi={0}\n", h), Error);
  }

  TEST_CASE("hand-built violations") {
    const Hypergraph h = make_hypergraph({{"A", "B"}, {"B", "C"}, {"C", "D"}});
    auto node = [&](const char* n) { return *h.node(n); };
    TreeDecomposition td;
    td.clusters = {{{node("A"), node("B")}, {0}, {0}},
                   {{node("B"), node("C")}, {1}, {1}},
                   {{node("A"), node("C"), node("D")}, {2}, {2, 0}}};
    for (auto& c : td.clusters) std::sort(c.chi.begin(), c.chi.end());
    td.edges = {{0, 1, {}}, {1, 2, {}}};
    CHECK(count_condition(validate(td, h), 0) == 2);
    refresh(td, h);
    const auto v = validate(td, h);
    CHECK(count_condition(v, 3) == 1);

    TreeDecomposition missing;
    missing.clusters = {{{node("A"), node("B"), node("C"), node("D")}, {0, 1}, {0, 1, 2}}};
    const auto m = validate(missing, h);
    CHECK(count_condition(m, 1) == 1);
  }

  TEST_CASE("acyclic inputs always reach width one") {
    oracle::Rng rng(29);
    for (int i = 0; i < 200; ++i) {
      const Hypergraph h = oracle::random_hypergraph(rng, 6, 4, 3);
      if (!gyo_acyclic(h).is_hypertree) continue;
      CHECK(decompose(h).stats.hyperwidth == 1);
    }
  }

  TEST_CASE("root selection prefers the most free variables") {
    const Hypergraph h = fixture("chain7").level(0);
    auto td = decompose(h);
    const NodeId free[] = {*h.node("V6")};
    select_root(td, free);
    const auto& chi = td.clusters[td.root].chi;
    CHECK(std::find(chi.begin(), chi.end(), *h.node("V6")) != chi.end());
  }

  TEST_CASE("text form round trip") {
    const Hypergraph h = fixture("cone_cloud").level(0);
    const auto td = decompose(h);
    const std::string text = format_decomposition(td, h);
    const auto back = parse_decomposition(text, h);
    CHECK(format_decomposition(back, h) == text);
    CHECK(back.root == td.root);
  }

  TEST_CASE("missing covers are filled in") {
    const Hypergraph h = make_hypergraph({{"A", "B"}, {"B", "C"}});
    const auto td = parse_decomposition("cluster x: chi={A,B,C} psi={0,1}\n", h);
    CHECK(td.stats.hyperwidth == 2);
    CHECK(td.stats.treewidth == 2);
  }

  TEST_CASE("same seed gives the same decomposition") {
    const Hypergraph h = fixture("cone_cloud").level(0);
    DecomposeOptions o;
    o.restarts = 4;
    o.seed = 99;
    CHECK(format_decomposition(decompose(h, o), h) == format_decomposition(decompose(h, o), h));
  }
}
