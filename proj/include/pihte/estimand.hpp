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

// Estimand expressions: parsing, flattening into a sum-product hierarchy, and
// literal dense evaluation (used as an oracle).
//
// Grammar (whitespace-insensitive):
//   estimand := [ "P" "(" varlist "|" "do" "(" varlist ")" ")" "=" ] expr
//   expr     := product ( "/" factor )?
//   product  := factor { factor }
//   factor   := prob | sum | "(" expr ")"
//   sum      := "sum" "[" varlist "]" "(" expr ")"
//   prob     := "P" "(" varlist ( "|" varlist )? ")"
//   varlist  := ident { "," ident }
// Identifiers are [A-Za-z_][A-Za-z0-9_]*. Trailing apostrophes are reserved
// for renamed copies and rejected in input.

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pihte/model.hpp"
#include "pihte/sparse_factor.hpp"

namespace pihte {

struct ProbTerm {
  std::vector<std::string> left;
  std::vector<std::string> right;

  friend bool operator==(const ProbTerm&, const ProbTerm&) = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { kProb, kProduct, kSum, kRatio };

  Kind kind = Kind::kProb;
  ProbTerm prob;                   // kProb
  std::vector<std::string> bound;  // kSum
  // kProduct: the factors; kSum: {body}; kRatio: {numerator, denominator}.
  std::vector<ExprPtr> children;

  static ExprPtr make_prob(ProbTerm term);
  static ExprPtr make_product(std::vector<ExprPtr> factors);
  static ExprPtr make_sum(std::vector<std::string> bound, ExprPtr body);
  static ExprPtr make_ratio(ExprPtr numerator, ExprPtr denominator);
};

// Optional "P(Y | do(X)) =" header of an estimand.
struct Query {
  std::vector<std::string> outcome;
  std::vector<std::string> do_vars;
};

struct Estimand {
  ExprPtr expr;
  std::optional<Query> query;
  std::vector<std::string> warnings;
};

Estimand parse_estimand(std::string_view text);
ExprPtr parse(std::string_view text);

std::set<std::string> free_vars(const Expr& e);
std::string to_string(const Expr& e);

// Name with renaming apostrophes stripped ("V0''" -> "V0").
std::string base_name(std::string_view name);

// Ordering used for every displayed variable list: digit runs compare
// numerically, so V2 < V10.
bool natural_less(std::string_view a, std::string_view b);

// Canonical binding key of a term over base names, e.g. "P(A,B|C)".
std::string term_key(const ProbTerm& term);

struct LevelFactor {
  enum class Kind { kProb, kChildOutput };

  Kind kind = Kind::kProb;
  ProbTerm term;                   // kProb, with renamed names
  std::size_t child = 0;           // kChildOutput: the child level id
  std::vector<std::string> scope;  // natural order
  // Ids of the child levels whose ratio numerator contains this factor.
  std::vector<std::size_t> ratios;
};

struct FlatLevel {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::vector<LevelFactor> factors;
  std::vector<std::string> sum_vars;
  std::vector<std::string> free_vars;
  std::vector<std::size_t> children;
  std::map<std::string, std::string> rename_map;  // fresh name -> original
  // Child levels only: the parent factors that form this ratio's numerator,
  // and the numerator's free variables (parent names).
  std::vector<std::size_t> numerator_factors;
  std::vector<std::string> numerator_free_vars;
};

struct Hierarchy {
  std::vector<FlatLevel> levels;
  std::size_t root = 0;
  ExprPtr source;
  std::vector<std::string> warnings;

  // Children before parents; the root is last.
  std::vector<std::size_t> bottom_up_order() const;
  std::size_t depth() const;
};

Hierarchy flatten(const ExprPtr& expr);

// The flattened level as an ordinary expression: sums over sum_vars of the
// product of its terms divided by the product of its children's expressions.
ExprPtr to_expr(const Hierarchy& hier, std::size_t level);

// Factor per distinct term, keyed by term_key, with scopes over base names.
using Bindings = std::map<std::string, SparseFactor>;

Bindings bind_empirical(const Expr& e, const Dataset& data, const VarSpace& space);

inline constexpr double kDefaultDenseLimit = 1e6;

// Literal recursive evaluation: sums enumerate, ratios divide with 0/0 -> 0
// and x/0 -> DivisionByZero. `space` supplies domain sizes and the ids used
// by the bindings (renamed names resolve through base_name). Throws
// DenseLimitExceeded when the enumeration would exceed dense_limit cells.
double dense_expr_eval(const Expr& e, const Bindings& bindings, const VarSpace& space,
                       const std::map<std::string, State>& free_assignment,
                       double dense_limit = kDefaultDenseLimit);

// Enumerates every assignment of the free variables. Scope ids are the base
// names' ids in `space`. Free variables listed in `fixed` take only their
// pinned value (they stay in the scope).
SparseFactor dense_expr_table(const Expr& e, const Bindings& bindings, const VarSpace& space,
                              double dense_limit = kDefaultDenseLimit,
                              const std::map<std::string, State>& fixed = {});

}  // namespace pihte
