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
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "pihte/cte.hpp"
#include "pihte/errors.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "pihte/scm.hpp"

using namespace pihte;

namespace {

const std::string kFixtures = PIHTE_FIXTURE_DIR;

std::size_t card(const CBN& cbn, std::size_t v) { return cbn.graph.variables[v].domain_size; }

// P(head | tail) from a joint, with head and tail given by name.
SparseFactor conditional(const SparseFactor& joint, const VarSpace& space, const std::vector<std::string>& keep,
                         const std::vector<std::string>& tail) {
  std::vector<VarId> drop_all;
  std::vector<VarId> drop_head;
  for (const auto& v : joint.scope()) {
    const std::string& n = space.name(v.id);
    const bool in_keep = std::find(keep.begin(), keep.end(), n) != keep.end();
    const bool in_tail = std::find(tail.begin(), tail.end(), n) != tail.end();
    if (!in_keep && !in_tail) drop_all.push_back(v.id);
    if (in_keep) drop_head.push_back(v.id);
  }
  const auto both = marginalize(joint, drop_all);
  if (tail.empty()) return both;
  return product(both, invert(marginalize(both, drop_head)));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("scm") {
  TEST_CASE("deterministic CPTs are one-hot") {
    const auto g = load_graph(kFixtures + "/napkin.graph");
    CbnOptions o;
    o.distribution = Distribution::kDeterministic;
    const CBN cbn = random_cbn(g, o, 4);
    for (std::size_t v = 0; v < cbn.cpts.size(); ++v) {
      if (cbn.latent[v]) continue;
      const auto& t = cbn.cpts[v].table;
      const std::size_t k = card(cbn, v);
      for (std::size_t r = 0; r < t.size(); r += k) {
        CHECK(std::count(t.begin() + r, t.begin() + r + k, 1.0) == 1);
        CHECK(std::count(t.begin() + r, t.begin() + r + k, 0.0) == static_cast<long>(k - 1));
      }
    }
  }

  TEST_CASE("Dirichlet rows are distributions") {
    const auto g = load_graph(kFixtures + "/chain7.graph");
    const CBN cbn = random_cbn(g, {}, 12);
    for (std::size_t v = 0; v < cbn.cpts.size(); ++v) {
      const auto& t = cbn.cpts[v].table;
      const std::size_t k = card(cbn, v);
      double parent_rows = 1;
      for (auto p : cbn.cpts[v].parents) parent_rows *= card(cbn, p);
      CHECK(t.size() == static_cast<std::size_t>(parent_rows) * k);
      for (std::size_t r = 0; r < t.size(); r += k) {
        double s = 0;
        for (std::size_t i = 0; i < k; ++i) s += t[r + i];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("bidirected edges become latent roots") {
    const auto g = load_graph(kFixtures + "/chain7.graph");
    const CBN cbn = random_cbn(g, {}, 1);
    CHECK(cbn.graph.bidirected_edges.empty());
    CHECK(std::count(cbn.latent.begin(), cbn.latent.end(), true) == 3);
    for (std::size_t v = 0; v < cbn.latent.size(); ++v) {
      if (cbn.latent[v]) CHECK(cbn.cpts[v].parents.empty());
    }
    CHECK(cbn.observed().size() == 7);
  }

  TEST_CASE("same seed gives the same model and sample") {
    const auto g = load_graph(kFixtures + "/napkin.graph");
    CHECK(cbn_to_json(random_cbn(g, {}, 9)) == cbn_to_json(random_cbn(g, {}, 9)));
    CHECK(cbn_to_json(random_cbn(g, {}, 9)) != cbn_to_json(random_cbn(g, {}, 10)));
    const CBN cbn = random_cbn(g, {}, 9);
    CHECK(sample_dataset(cbn, 50, 3).cells == sample_dataset(cbn, 50, 3).cells);
  }

  TEST_CASE("a deterministic chain repeats one row") {
    const auto g = parse_graph("var A 1; var B 3; var C 2; A -> B; B -> C");
    CbnOptions o;
    o.distribution = Distribution::kDeterministic;
    const Dataset d = sample_dataset(random_cbn(g, o, 2), 40, 5);
    for (std::size_t r = 1; r < d.n_rows; ++r) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(d.at(r, c) == d.at(0, c));
    }
    CHECK(sample_dataset(random_cbn(g, o, 2), 1, 5).n_rows == 1);
  }

  TEST_CASE("root frequencies approach the CPT") {
    const auto g = parse_graph("var A 4");
    const CBN cbn = random_cbn(g, {}, 6);
    const Dataset d = sample_dataset(cbn, 100000, 7);
    std::vector<double> freq(4, 0.0);
    for (std::size_t r = 0; r < d.n_rows; ++r) freq[d.at(r, 0)] += 1.0 / d.n_rows;
    double tv = 0;
    for (std::size_t i = 0; i < 4; ++i) tv += std::fabs(freq[i] - cbn.cpts[0].table[i]) / 2;
    CHECK(tv < 0.02);
  }

  TEST_CASE("intervening on an unrelated root changes nothing") {
    const auto g = parse_graph("var A 2; var B 3; var Z 2; A -> B");
    const CBN cbn = random_cbn(g, {}, 3);
    const VarSpace space = cbn.observed_space();
    const auto truth = interventional_truth(cbn, {{"Z", 1}}, {"A", "B"});
    const VarId z[] = {space.id("Z")};
    const auto without_z = marginalize(truth, z);
    const auto joint = observational_joint(cbn);
    CHECK(total_variation(without_z, marginalize(joint, z)) < 1e-12);
  }

  TEST_CASE("three-chain intervention by hand") {
    const auto g = parse_graph("var A 2; var B 2; var C 3; A -> B; B -> C");
    const CBN cbn = random_cbn(g, {}, 8);
    for (State b = 0; b < 2; ++b) {
      const auto truth = interventional_truth(cbn, {{"B", b}}, {"C"});
      REQUIRE(truth.size() == 3);
      double total = 0;
      for (State c = 0; c < 3; ++c) {
        // Scope order is (B, C).
        const State key[] = {b, c};
        CHECK(truth.lookup(key) == doctest::Approx(cbn.cpts[2].table[b * 3 + c]).epsilon(1e-12));
        total += truth.lookup(key);
      }
      CHECK(total == doctest::Approx(1.0));
    }
    CHECK_THROWS(interventional_truth(cbn, {{"B", 5}}, {"C"}));
  }

  TEST_CASE("Markovian truth equals the adjustment formula") {
    const auto g = parse_graph("var Z 3; var X 2; var Y 2; Z -> X; Z -> Y; X -> Y");
    const CBN cbn = random_cbn(g, {}, 15);
    const VarSpace space = cbn.observed_space();
    const auto joint = observational_joint(cbn);
    Bindings b;
    b.emplace(term_key(ProbTerm{{"Z"}, {}}), conditional(joint, space, {"Z"}, {}));
    b.emplace(term_key(ProbTerm{{"Y"}, {"X", "Z"}}), conditional(joint, space, {"Y"}, {"X", "Z"}));
    const auto e = parse("sum[Z](P(Y|X,Z) P(Z))");
    const auto table = dense_expr_table(*e, b, space);
    for (State x = 0; x < 2; ++x) {
      const auto truth = interventional_truth(cbn, {{"X", x}}, {"Y"});
      const auto d = compare_factors(restrict_to(table, space.id("X"), x), truth);
      CHECK(d.same_scope);
      CHECK(d.max_abs < 1e-12);
    }
  }

  TEST_CASE("plug-in error shrinks with the sample") {
    const auto g = parse_graph("var V0 2; var V1 2; var V2 2; V0 -> V1; V1 -> V2");
    std::vector<double> small;
    std::vector<double> large;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const CBN cbn = random_cbn(g, {}, seed);
      const VarSpace space = cbn.observed_space();
      for (std::size_t n : {100, 100000}) {
        const Dataset d = sample_dataset(cbn, n, seed + 100);
        const std::string left[] = {"V2"};
        const std::string right[] = {"V0"};
        const auto est = empirical_prob(d, space, left, right);
        double worst = 0;
        for (State x = 0; x < 2; ++x) {
          worst = std::max(worst, total_variation(restrict_to(est, space.id("V0"), x),
                                                  interventional_truth(cbn, {{"V0", x}}, {"V2"})));
        }
        (n == 100 ? small : large).push_back(worst);
      }
    }
    CHECK(median(large) < median(small));
    CHECK(median(large) < 0.02);
  }

  TEST_CASE("CBN JSON round trip") {
    const auto g = load_graph(kFixtures + "/napkin.graph");
    CbnOptions o;
    o.distribution = Distribution::kMixture;
    const CBN cbn = random_cbn(g, o, 33);
    const std::string text = cbn_to_json(cbn);
    CHECK(cbn_to_json(cbn_from_json(text)) == text);
    CHECK_THROWS(cbn_from_json("{\"variables\": 3}"));
  }

  TEST_CASE("distribution names") {
    for (auto d : {Distribution::kUniform, Distribution::kDirichlet, Distribution::kDeterministic,
                   Distribution::kMixture}) {
      CHECK(parse_distribution(to_string(d)) == d);
    }
    CHECK_THROWS(parse_distribution("gaussian"));
  }

  TEST_CASE("random instances repeat and parse") {
    const auto a = random_instance(77);
    const auto b = random_instance(77);
    CHECK(a.estimand == b.estimand);
    CHECK(a.data.cells == b.data.cells);
    CHECK_NOTHROW(parse(a.estimand));
    CHECK(a.graph.variables.size() <= 8);
  }
}
