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

#include "pihte/scm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "pihte/errors.hpp"

namespace pihte {
namespace {

using nlohmann::json;

std::size_t row_count(const CausalGraph& g, const std::vector<std::size_t>& parents) {
  std::size_t rows = 1;
  for (std::size_t p : parents) rows *= g.variables[p].domain_size;
  return rows;
}

std::vector<double> dirichlet_row(std::uint32_t k, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> row(k);
  double total = 0.0;
  for (auto& x : row) {
    x = gamma(rng);
    total += x;
  }
  if (total <= 0.0) {
    std::fill(row.begin(), row.end(), 1.0 / k);
    return row;
  }
  for (auto& x : row) x /= total;
  return row;
}

std::vector<double> one_hot_row(std::uint32_t k, std::mt19937_64& rng) {
  std::vector<double> row(k, 0.0);
  row[std::uniform_int_distribution<std::uint32_t>(0, k - 1)(rng)] = 1.0;
  return row;
}

std::string fresh_latent_name(const CausalGraph& g, std::size_t index) {
  std::string name = "U" + std::to_string(index);
  while (g.index_of(name)) name += "_";
  return name;
}

// Row of `cpt` selected by the current states of its parents.
std::size_t parent_row(const CBN& cbn, const Cpt& cpt, std::span<const State> states) {
  std::size_t row = 0;
  for (std::size_t p : cpt.parents) row = row * cbn.graph.variables[p].domain_size + states[p];
  return row;
}

std::size_t observed_index(const CBN& cbn, const std::string& name) {
  auto idx = cbn.graph.index_of(name);
  if (!idx || cbn.latent[*idx]) throw UnknownVariable("'" + name + "' is not an observed variable");
  return *idx;
}

// Sums the truncated product over every configuration, grouping by `keep`.
SparseFactor enumerate(const CBN& cbn, const std::map<std::size_t, State>& clamp,
                       const std::vector<std::size_t>& keep, double dense_limit) {
  const auto& vars = cbn.graph.variables;
  const std::size_t n = vars.size();
  double cells = 1.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (!clamp.count(v)) cells *= vars[v].domain_size;
  }
  if (cells > dense_limit) {
    throw DenseLimitExceeded("model has " + std::to_string(cells) + " configurations, limit " +
                             std::to_string(dense_limit));
  }
  const VarSpace space = cbn.observed_space();
  std::vector<ScopeVar> scope;
  for (std::size_t v : keep) scope.push_back(space.scope_var(space.id(vars[v].name)));

  std::map<std::vector<State>, double> acc;
  std::vector<State> states(n, 0);
  for (const auto& [v, s] : clamp) states[v] = s;
  std::vector<State> key(keep.size());
  while (true) {
    double w = 1.0;
    for (std::size_t v = 0; v < n && w != 0.0; ++v) {
      if (clamp.count(v)) continue;
      const Cpt& cpt = cbn.cpts[v];
      w *= cpt.table[parent_row(cbn, cpt, states) * vars[v].domain_size + states[v]];
    }
    if (w != 0.0) {
      for (std::size_t i = 0; i < keep.size(); ++i) key[i] = states[keep[i]];
      acc[key] += w;
    }
    std::size_t v = 0;
    for (; v < n; ++v) {
      if (clamp.count(v)) continue;
      if (++states[v] < vars[v].domain_size) break;
      states[v] = 0;
    }
    if (v == n) break;
  }
  std::vector<State> keys;
  std::vector<double> values;
  for (const auto& [k, w] : acc) {
    keys.insert(keys.end(), k.begin(), k.end());
    values.push_back(w);
  }
  return SparseFactor::from_rows(std::move(scope), keys, values);
}

}  // namespace

Distribution parse_distribution(std::string_view name) {
  if (name == "uniform") return Distribution::kUniform;
  if (name == "dirichlet") return Distribution::kDirichlet;
  if (name == "deterministic") return Distribution::kDeterministic;
  if (name == "mixture") return Distribution::kMixture;
  throw ParseError("unknown distribution '" + std::string(name) + "'");
}

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::kUniform: return "uniform";
    case Distribution::kDirichlet: return "dirichlet";
    case Distribution::kDeterministic: return "deterministic";
    case Distribution::kMixture: return "mixture";
  }
  return "?";
}

std::vector<std::size_t> CBN::observed() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < graph.variables.size(); ++v) {
    if (!latent[v]) out.push_back(v);
  }
  return out;
}

VarSpace CBN::observed_space() const {
  VarSpace space;
  for (std::size_t v : observed()) space.add(graph.variables[v].name, graph.variables[v].domain_size);
  return space;
}

CBN random_cbn(const CausalGraph& graph, const CbnOptions& options, std::uint64_t seed) {
  if (options.alpha <= 0.0) throw ValidationError("alpha must be positive");
  CBN cbn;
  cbn.graph.variables = graph.variables;
  cbn.graph.directed_edges = graph.directed_edges;
  cbn.latent.assign(graph.variables.size(), false);
  for (std::size_t i = 0; i < graph.bidirected_edges.size(); ++i) {
    const auto [a, b] = graph.bidirected_edges[i];
    const std::size_t u = cbn.graph.variables.size();
    cbn.graph.variables.push_back({fresh_latent_name(cbn.graph, i), 2});
    cbn.latent.push_back(true);
    cbn.graph.directed_edges.emplace_back(u, a);
    cbn.graph.directed_edges.emplace_back(u, b);
  }
  cbn.graph.topological_order();  // rejects cycles

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(options.mixture_weight);
  for (std::size_t v = 0; v < cbn.graph.variables.size(); ++v) {
    Cpt cpt;
    cpt.parents = cbn.graph.parents(v);
    const std::uint32_t k = cbn.graph.variables[v].domain_size;
    const std::size_t rows = row_count(cbn.graph, cpt.parents);
    Distribution family = cbn.latent[v] ? Distribution::kDirichlet : options.distribution;
    if (family == Distribution::kMixture) family = coin(rng) ? Distribution::kDeterministic : Distribution::kDirichlet;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row;
      switch (family) {
        case Distribution::kUniform: row.assign(k, 1.0 / k); break;
        case Distribution::kDeterministic: row = one_hot_row(k, rng); break;
        default: row = dirichlet_row(k, options.alpha, rng); break;
      }
      cpt.table.insert(cpt.table.end(), row.begin(), row.end());
    }
    cbn.cpts.push_back(std::move(cpt));
  }
  return cbn;
}

Dataset sample_dataset(const CBN& cbn, std::size_t n_rows, std::uint64_t seed) {
  if (n_rows == 0) throw ValidationError("need at least one row");
  const auto order = cbn.graph.topological_order();
  const auto observed = cbn.observed();
  Dataset data;
  for (std::size_t v : observed) {
    data.columns.push_back(cbn.graph.variables[v].name);
    data.domain_sizes.push_back(cbn.graph.variables[v].domain_size);
  }
  data.n_rows = n_rows;
  data.cells.reserve(n_rows * observed.size());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<State> states(cbn.graph.variables.size(), 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t v : order) {
      const Cpt& cpt = cbn.cpts[v];
      const std::uint32_t k = cbn.graph.variables[v].domain_size;
      const double* row = cpt.table.data() + parent_row(cbn, cpt, states) * k;
      const double u = unit(rng);
      double acc = 0.0;
      State pick = k - 1;
      for (State s = 0; s < k; ++s) {
        acc += row[s];
        if (u < acc) {
          pick = s;
          break;
        }
      }
      // Rounding can leave u above the last cumulative value; fall back to
      // the last state with positive mass.
      if (pick == k - 1 && row[pick] == 0.0) {
        while (pick > 0 && row[pick] == 0.0) --pick;
      }
      states[v] = pick;
    }
    for (std::size_t v : observed) data.cells.push_back(states[v]);
  }
  return data;
}

SparseFactor interventional_truth(const CBN& cbn, const std::map<std::string, State>& assignment,
                                  const std::vector<std::string>& target, double dense_limit) {
  std::map<std::size_t, State> clamp;
  for (const auto& [name, value] : assignment) {
    const std::size_t v = observed_index(cbn, name);
    if (value >= cbn.graph.variables[v].domain_size) {
      throw ValidationError("do value " + std::to_string(value) + " is outside the domain of '" + name + "'");
    }
    clamp[v] = value;
  }
  std::set<std::size_t> keep_set;
  for (const auto& name : target) keep_set.insert(observed_index(cbn, name));
  for (const auto& [v, s] : clamp) keep_set.insert(v);
  return enumerate(cbn, clamp, std::vector<std::size_t>(keep_set.begin(), keep_set.end()), dense_limit);
}

SparseFactor observational_joint(const CBN& cbn, double dense_limit) {
  return enumerate(cbn, {}, cbn.observed(), dense_limit);
}

double total_variation(const SparseFactor& p, const SparseFactor& q) {
  if (!std::equal(p.scope().begin(), p.scope().end(), q.scope().begin(), q.scope().end())) {
    throw ScopeConflict("total variation needs identical scopes");
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < p.size(); ++r) sum += std::abs(p.value(r) - q.lookup(p.key(r)));
  for (std::size_t r = 0; r < q.size(); ++r) {
    if (p.lookup(q.key(r)) == 0.0) sum += q.value(r);
  }
  return 0.5 * sum;
}

RandomInstance random_instance(std::uint64_t seed, const RandomInstanceOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  RandomInstance inst;
  const std::size_t n = uniform(2, std::max<std::size_t>(options.max_vars, 2));
  const std::uint32_t max_k = std::max<std::uint32_t>(options.max_domain, 1);
  for (std::size_t i = 0; i < n; ++i) {
    inst.graph.variables.push_back({"V" + std::to_string(i), static_cast<std::uint32_t>(uniform(std::min<std::uint32_t>(2, max_k), max_k))});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(0.35)) inst.graph.directed_edges.emplace_back(i, j);
    }
  }
  if (n >= 2 && coin(0.3)) {
    const std::size_t a = uniform(0, n - 2);
    inst.graph.bidirected_edges.emplace_back(a, uniform(a + 1, n - 1));
  }
  CbnOptions copts;
  const CBN cbn = random_cbn(inst.graph, copts, rng());
  inst.data = sample_dataset(cbn, uniform(std::min<std::size_t>(20, options.max_rows), std::max<std::size_t>(options.max_rows, 1)), rng());

  auto term = [&]() {
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t total = uniform(1, std::min<std::size_t>(3, n));
    const std::size_t left = uniform(1, total);
    ProbTerm t;
    for (std::size_t i = 0; i < total; ++i) {
      (i < left ? t.left : t.right).push_back("V" + std::to_string(ids[i]));
    }
    return Expr::make_prob(std::move(t));
  };
  std::function<ExprPtr(bool)> sum_product = [&](bool may_nest) -> ExprPtr {
    std::vector<ExprPtr> factors;
    const std::size_t terms = uniform(1, 3);
    for (std::size_t i = 0; i < terms; ++i) factors.push_back(term());
    if (may_nest && coin(0.35)) factors.push_back(sum_product(false));
    ExprPtr body = factors.size() == 1 ? factors[0] : Expr::make_product(std::move(factors));
    const auto vars = free_vars(*body);
    std::vector<std::string> bound;
    for (const auto& v : vars) {
      if (coin(0.5)) bound.push_back(v);
    }
    if (bound.size() == vars.size() && !bound.empty()) bound.erase(bound.begin() + static_cast<std::ptrdiff_t>(uniform(0, bound.size() - 1)));
    return bound.empty() ? body : Expr::make_sum(std::move(bound), std::move(body));
  };

  ExprPtr e;
  if (options.allow_ratio && coin(0.4)) {
    const bool wrap = coin(0.5);
    ExprPtr ratio = Expr::make_ratio(sum_product(!wrap), sum_product(false));
    if (wrap) {
      std::vector<std::string> bound;
      for (const auto& v : free_vars(*ratio)) {
        if (coin(0.4)) bound.push_back(v);
      }
      e = bound.empty() ? ratio : Expr::make_sum(std::move(bound), ratio);
    } else {
      e = ratio;
    }
  } else {
    e = sum_product(true);
  }
  inst.estimand = to_string(*e);
  return inst;
}

std::string cbn_to_json(const CBN& cbn) {
  const auto& vars = cbn.graph.variables;
  json j;
  j["variables"] = json::array();
  for (std::size_t v = 0; v < vars.size(); ++v) {
    j["variables"].push_back({{"name", vars[v].name}, {"domain_size", vars[v].domain_size}, {"latent", bool(cbn.latent[v])}});
  }
  j["edges"] = json::array();
  for (const auto& [a, b] : cbn.graph.directed_edges) j["edges"].push_back({vars[a].name, vars[b].name});
  j["cpts"] = json::object();
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const Cpt& cpt = cbn.cpts[v];
    json parents = json::array();
    for (std::size_t p : cpt.parents) parents.push_back(vars[p].name);
    json rows = json::array();
    const std::uint32_t k = vars[v].domain_size;
    for (std::size_t r = 0; r * k < cpt.table.size(); ++r) {
      rows.push_back(std::vector<double>(cpt.table.begin() + static_cast<std::ptrdiff_t>(r * k),
                                         cpt.table.begin() + static_cast<std::ptrdiff_t>((r + 1) * k)));
    }
    j["cpts"][vars[v].name] = {{"parents", parents}, {"table", rows}};
  }
  return j.dump(1) + "\n";
}

CBN cbn_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("CBN JSON: ") + e.what());
  }
  CBN cbn;
  try {
    for (const auto& v : j.at("variables")) {
      const std::string name = v.at("name").get<std::string>();
      if (cbn.graph.index_of(name)) throw ValidationError("variable '" + name + "' repeated");
      const auto k = v.at("domain_size").get<std::uint32_t>();
      if (k == 0) throw ValidationError("variable '" + name + "' has an empty domain");
      cbn.graph.variables.push_back({name, k});
      cbn.latent.push_back(v.value("latent", false));
    }
    auto index = [&](const std::string& name) {
      auto i = cbn.graph.index_of(name);
      if (!i) throw UnknownVariable("'" + name + "' is not a CBN variable");
      return *i;
    };
    for (const auto& e : j.at("edges")) {
      cbn.graph.directed_edges.emplace_back(index(e.at(0).get<std::string>()), index(e.at(1).get<std::string>()));
    }
    cbn.graph.topological_order();
    const auto& cpts = j.at("cpts");
    for (std::size_t v = 0; v < cbn.graph.variables.size(); ++v) {
      const auto& var = cbn.graph.variables[v];
      const auto& c = cpts.at(var.name);
      Cpt cpt;
      for (const auto& p : c.at("parents")) cpt.parents.push_back(index(p.get<std::string>()));
      auto sorted = cpt.parents;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != cbn.graph.parents(v)) throw ValidationError("CPT parents of '" + var.name + "' differ from the edges");
      if (cbn.latent[v] && !cpt.parents.empty()) throw ValidationError("latent '" + var.name + "' has parents");
      const auto& rows = c.at("table");
      if (rows.size() != row_count(cbn.graph, cpt.parents)) {
        throw ValidationError("CPT of '" + var.name + "' has the wrong number of rows");
      }
      for (const auto& row : rows) {
        const auto values = row.get<std::vector<double>>();
        if (values.size() != var.domain_size) throw ValidationError("CPT row of '" + var.name + "' has the wrong width");
        double total = 0.0;
        for (double x : values) {
          if (!(x >= 0.0)) throw ValidationError("CPT of '" + var.name + "' has a negative entry");
          total += x;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ValidationError("CPT row of '" + var.name + "' does not sum to 1");
        cpt.table.insert(cpt.table.end(), values.begin(), values.end());
      }
      cbn.cpts.push_back(std::move(cpt));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("CBN JSON: ") + e.what());
  }
  return cbn;
}

CBN load_cbn(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return cbn_from_json(os.str());
}

}  // namespace pihte
