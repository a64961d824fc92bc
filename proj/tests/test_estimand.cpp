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
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "pihte/errors.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "test_seeds.hpp"

using namespace pihte;

namespace {

const std::string kFixtures = PIHTE_FIXTURE_DIR;

std::string read(const std::string& name) {
  std::ifstream in(kFixtures + "/" + name);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> scopes(const FlatLevel& lv) {
  std::vector<std::string> out;
  for (const auto& f : lv.factors) {
    std::string s = f.kind == LevelFactor::Kind::kChildOutput ? "~" : "";
    for (const auto& v : f.scope) s += v + " ";
    out.push_back(s);
  }
  return out;
}

SparseFactor table(VarId id, std::vector<double> values) {
  std::vector<State> keys;
  for (State s = 0; s < values.size(); ++s) keys.push_back(s);
  return SparseFactor::from_rows({{id, static_cast<std::uint32_t>(values.size())}}, keys, values);
}

}  // namespace

TEST_SUITE("estimand") {
  TEST_CASE("single term") {
    const auto e = parse("P(A)");
    REQUIRE(e->kind == Expr::Kind::kProb);
    CHECK(e->prob == ProbTerm{{"A"}, {}});
  }

  TEST_CASE("conditional term") {
    const auto e = parse("P(A,B|C)");
    CHECK(e->prob == ProbTerm{{"A", "B"}, {"C"}});
    CHECK(term_key(e->prob) == "P(A,B|C)");
    CHECK(term_key(ProbTerm{{"B'", "A"}, {"C''"}}) == "P(A,B|C)");
  }

  TEST_CASE("napkin is a ratio of two sums") {
    const auto e = parse("sum[W](P(X,Y|R,W) P(W)) / sum[W](P(X|R,W) P(W))");
    REQUIRE(e->kind == Expr::Kind::kRatio);
    CHECK(e->children[0]->kind == Expr::Kind::kSum);
    CHECK(e->children[1]->kind == Expr::Kind::kSum);
    CHECK(free_vars(*e) == std::set<std::string>{"R", "X", "Y"});
    CHECK(to_string(*parse(to_string(*e))) == to_string(*e));
    CHECK_THROWS_AS(parse("P(A) / P(B) P(C)"), SyntaxError);
  }

  TEST_CASE("syntax errors carry a position") {
    try {
      parse("sum[A](P(B|A)");
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.position() == 13);
    }
    CHECK_THROWS_AS(parse("P()"), SyntaxError);
    CHECK_THROWS_AS(parse("P(A'"), SyntaxError);
    CHECK_THROWS_AS(parse("Q(A)"), SyntaxError);
    CHECK_THROWS_AS(parse("P(A) junk"), SyntaxError);
  }

  TEST_CASE("query header") {
    const auto est = parse_estimand("P(Y | do(X)) = sum[W](P(Y|X,W) P(W))");
    REQUIRE(est.query);
    CHECK(est.query->outcome == std::vector<std::string>{"Y"});
    CHECK(est.query->do_vars == std::vector<std::string>{"X"});
    CHECK(free_vars(*est.expr) == std::set<std::string>{"X", "Y"});
  }

  TEST_CASE("bound variables may not repeat") {
    CHECK_THROWS_AS(parse("sum[A,A](P(A))"), DuplicateBoundVar);
  }

  TEST_CASE("sums over absent variables are dropped with a warning") {
    const auto est = parse_estimand("sum[Z](P(A))");
    CHECK(est.warnings.size() == 1);
    CHECK(est.expr->kind == Expr::Kind::kProb);
  }

  TEST_CASE("chain-7 flattens to one level") {
    const Hierarchy h = flatten(parse_estimand(read("chain7.est")).expr);
    REQUIRE(h.levels.size() == 1);
    const FlatLevel& lv = h.levels[0];
    CHECK(lv.factors.size() == 7);
    CHECK(lv.children.empty());
    CHECK(std::set<std::string>(lv.sum_vars.begin(), lv.sum_vars.end()) ==
          std::set<std::string>{"V0'", "V1", "V2", "V3", "V4", "V5"});
    CHECK(lv.free_vars == std::vector<std::string>{"V0", "V6"});
    CHECK(lv.rename_map.at("V0'") == "V0");
    CHECK(h.depth() == 1);
  }

  TEST_CASE("napkin flattens to two levels") {
    const Hierarchy h = flatten(parse_estimand(read("napkin.est")).expr);
    REQUIRE(h.levels.size() == 2);
    CHECK(h.depth() == 2);
    const FlatLevel& root = h.levels[h.root];
    REQUIRE(root.children.size() == 1);
    const FlatLevel& child = h.levels[root.children[0]];
    CHECK(scopes(child) == std::vector<std::string>{"R W' X ", "W' "});
    CHECK(child.free_vars == std::vector<std::string>{"R", "X"});
    CHECK(scopes(root) == std::vector<std::string>{"R W X Y ", "W ", "~R X "});
    CHECK(child.numerator_factors == std::vector<std::size_t>{0, 1});
    CHECK(h.bottom_up_order().back() == h.root);
  }

  TEST_CASE("cone-cloud flattens to 13 factors") {
    const Hierarchy h = flatten(parse_estimand(read("cone_cloud.est")).expr);
    REQUIRE(h.levels.size() == 1);
    const FlatLevel& lv = h.levels[0];
    CHECK(lv.factors.size() == 13);
    for (const char* v : {"V10'", "V11'", "V12'", "V13'", "V14'"}) {
      CHECK(std::find(lv.sum_vars.begin(), lv.sum_vars.end(), v) != lv.sum_vars.end());
    }
    CHECK(lv.free_vars == std::vector<std::string>{"V0", "V4", "V10", "V14"});
  }

  TEST_CASE("fresh names add apostrophes") {
    const auto h = flatten(parse("sum[A](P(A) sum[A](P(A|B) sum[A](P(B|A))))"));
    const auto& sums = h.levels[0].sum_vars;
    CHECK(std::set<std::string>(sums.begin(), sums.end()) == std::set<std::string>{"A", "A'", "A''"});
    CHECK(h.levels[0].free_vars == std::vector<std::string>{"B"});
  }

  TEST_CASE("dense evaluation of single terms") {
    VarSpace space;
    space.add("A", 2);
    Bindings b;
    b.emplace("P(A)", table(0, {0.3, 0.7}));
    CHECK(dense_expr_eval(*parse("P(A)"), b, space, {{"A", 1}}) == doctest::Approx(0.7));
    CHECK(dense_expr_eval(*parse("sum[A](P(A))"), b, space, {}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dense_expr_eval(*parse("P(A)"), b, space, {}), IncompleteAssignment);
  }

  TEST_CASE("ratio semantics") {
    VarSpace space;
    space.add("A", 2);
    space.add("B", 2);
    Bindings b;
    b.emplace("P(A)", table(0, {0.0, 1.0}));
    b.emplace("P(B)", table(1, {0.5, 0.5}));
    // 0/0 is 0.
    CHECK(dense_expr_eval(*parse("P(A) / (P(A))"), b, space, {{"A", 0}}) == 0.0);
    CHECK(dense_expr_eval(*parse("P(B) / (P(A))"), b, space, {{"A", 1}, {"B", 0}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(dense_expr_eval(*parse("P(B) / (P(A))"), b, space, {{"A", 0}, {"B", 0}}), DivisionByZero);
  }

  TEST_CASE("dense limit") {
    VarSpace space;
    Bindings b;
    std::string bound;
    std::string body;
    for (int i = 0; i < 30; ++i) {
      const std::string v = "V" + std::to_string(i);
      space.add(v, 3);
      b.emplace("P(" + v + ")", table(static_cast<VarId>(i), {0.2, 0.3, 0.5}));
      bound += (i ? "," : "") + v;
      body += "P(" + v + ")";
    }
    const auto e = parse("sum[" + bound + "](" + body + ")");
    CHECK_THROWS_AS(dense_expr_eval(*e, b, space, {}), DenseLimitExceeded);
  }

  TEST_CASE("empirical bindings for a two-variable mixture") {
    // Rows (A,B): (0,0) (0,1) (1,1) (1,1).
    const auto d = oracle::make_dataset({"A", "B"}, {2, 2}, {{0, 0}, {0, 1}, {1, 1}, {1, 1}});
    VarSpace space;
    space.add("A", 2);
    space.add("B", 2);
    const auto e = parse("sum[A](P(A) P(B|A))");
    const Bindings b = bind_empirical(*e, d, space);
    CHECK(b.size() == 2);
    // P(B=1) = 0.5 * 0.5 + 0.5 * 1.
    CHECK(dense_expr_eval(*e, b, space, {{"B", 1}}) == doctest::Approx(0.75));
    CHECK(dense_expr_eval(*e, b, space, {{"B", 0}}) == doctest::Approx(0.25));
    const auto t = dense_expr_table(*e, b, space);
    CHECK(t.size() == 2);
    const auto pinned = dense_expr_table(*e, b, space, kDefaultDenseLimit, {{"B", 1}});
    REQUIRE(pinned.size() == 1);
    CHECK(pinned.value(0) == doctest::Approx(0.75));
  }

  TEST_CASE("flattening keeps free variables and values") {
    for (auto seed : test_seeds()) {
      oracle::Rng rng(seed);
      for (int i = 0; i < 50; ++i) {
        const auto text = oracle::random_expression(rng, 4, 1);
        const auto e = parse(text);
        const auto h = flatten(e);
        VarSpace space;
        for (int v = 0; v < 4; ++v) space.add("V" + std::to_string(v), 2 + static_cast<std::uint32_t>(rng() % 2));
        const auto b = oracle::random_bindings(rng, *e, space);
        const auto d = oracle::compare(oracle::evaluate_expr(*to_expr(h, h.root), b, space),
                                       oracle::evaluate_expr(*e, b, space));
        CHECK_MESSAGE(d.same_vars, text);
        CHECK_MESSAGE(d.max_rel < 1e-12, text);
      }
    }
  }

  TEST_CASE("natural order") {
    CHECK(natural_less("V2", "V10"));
    CHECK_FALSE(natural_less("V10", "V2"));
    CHECK(natural_less("A", "B"));
    CHECK(base_name("V0''") == "V0");
  }
}
