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

// Synthetic causal Bayesian networks: random CPTs, ancestral sampling, and
// exact interventional distributions by enumeration.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "pihte/sparse_factor.hpp"

namespace pihte {

enum class Distribution { kUniform, kDirichlet, kDeterministic, kMixture };

Distribution parse_distribution(std::string_view name);
std::string to_string(Distribution d);

// P(var | parents). Rows are parent configurations in mixed radix with the
// last parent varying fastest; each row holds card(var) probabilities.
struct Cpt {
  std::vector<std::size_t> parents;
  std::vector<double> table;
};

// A graph whose bidirected edges have been replaced by explicit latent roots.
struct CBN {
  CausalGraph graph;          // no bidirected edges
  std::vector<bool> latent;   // per variable
  std::vector<Cpt> cpts;      // per variable

  std::vector<std::size_t> observed() const;
  // Ids of observed variables in graph order; matches sampled columns.
  VarSpace observed_space() const;
};

struct CbnOptions {
  Distribution distribution = Distribution::kDirichlet;
  double alpha = 1.0;
  double mixture_weight = 0.5;  // chance a mixture CPT is deterministic
};

// Each bidirected edge becomes a binary latent parent of both endpoints with
// a Dirichlet CPT. Observed CPTs follow the chosen family.
CBN random_cbn(const CausalGraph& graph, const CbnOptions& options, std::uint64_t seed);

// i.i.d. ancestral samples with latent columns dropped.
Dataset sample_dataset(const CBN& cbn, std::size_t n_rows, std::uint64_t seed);

// P(target | do(assignment)) by the truncated product over every
// configuration of observed and latent variables. The scope holds the target
// and intervened variables (the latter at their assigned value); ids follow
// observed_space().
SparseFactor interventional_truth(const CBN& cbn, const std::map<std::string, State>& assignment,
                                  const std::vector<std::string>& target,
                                  double dense_limit = kDefaultDenseLimit);

// The observational joint over every observed variable.
SparseFactor observational_joint(const CBN& cbn, double dense_limit = kDefaultDenseLimit);

// Half the L1 distance between two factors over the same scope.
double total_variation(const SparseFactor& p, const SparseFactor& q);

// A small random model, dataset and estimand for oracle comparisons.
struct RandomInstanceOptions {
  std::size_t max_vars = 8;
  std::uint32_t max_domain = 3;
  std::size_t max_rows = 300;
  bool allow_ratio = true;
};

struct RandomInstance {
  CausalGraph graph;
  Dataset data;
  std::string estimand;
};

// Variables V0..V(n-1) over a random DAG with Dirichlet CPTs; the estimand
// has at most two nested sums and at most one ratio. Deterministic in seed.
RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& options = {});

// JSON: {"variables": [{"name", "domain_size", "latent"}],
//        "edges": [[parent, child]], "cpts": {name: {"parents": [..], "table": [[..]]}}}
std::string cbn_to_json(const CBN& cbn);
CBN cbn_from_json(std::string_view text);
CBN load_cbn(const std::filesystem::path& path);

}  // namespace pihte
