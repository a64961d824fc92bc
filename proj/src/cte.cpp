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

#include "pihte/cte.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "pihte/errors.hpp"

namespace pihte {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PoolItem {
  const SparseFactor* factor = nullptr;
  bool inverse = false;
};

// Multiplies the pool into one table and sums out everything outside `keep`.
// See CteOptions::greedy for the two orders.
SparseFactor combine(std::vector<PoolItem> pool, const std::vector<VarId>& keep, const CteOptions& options) {
  TableMonitor* monitor = options.monitor;
  const ProductLimits limits = monitor ? monitor->limits() : ProductLimits{};
  auto kept = [&](VarId v) { return std::binary_search(keep.begin(), keep.end(), v); };

  auto eliminate = [&](SparseFactor cur) {
    if (!options.greedy && !pool.empty()) return cur;
    std::vector<VarId> out;
    for (const ScopeVar& v : cur.scope()) {
      if (kept(v.id)) continue;
      const bool needed = std::any_of(pool.begin(), pool.end(),
                                      [&](const PoolItem& p) { return p.factor->has_var(v.id); });
      if (!needed) out.push_back(v.id);
    }
    if (out.empty()) return cur;
    SparseFactor reduced = marginalize(cur, out);
    if (monitor) monitor->record(reduced);
    return reduced;
  };

  if (pool.empty()) return SparseFactor();

  std::size_t start = 0;
  for (std::size_t i = 1; options.greedy && i < pool.size(); ++i) {
    const auto& a = *pool[i].factor;
    const auto& b = *pool[start].factor;
    if (a.width() > b.width() || (a.width() == b.width() && a.size() < b.size())) start = i;
  }
  SparseFactor cur = *pool[start].factor;
  pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(start));
  cur = eliminate(std::move(cur));

  while (!pool.empty()) {
    std::size_t best = 0;
    std::size_t best_new = 0;
    for (std::size_t i = 0; options.greedy && i < pool.size(); ++i) {
      std::size_t fresh = 0;
      for (const ScopeVar& v : pool[i].factor->scope()) {
        if (!cur.has_var(v.id)) ++fresh;
      }
      if (i == 0 || fresh < best_new ||
          (fresh == best_new && pool[i].factor->size() < pool[best].factor->size())) {
        best = i;
        best_new = fresh;
      }
    }
    const PoolItem item = pool[best];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    ProductDiagnostics diag;
    cur = product(cur, *item.factor, limits, item.inverse ? &diag : nullptr);
    if (item.inverse && options.dropped_unmatched) *options.dropped_unmatched += diag.unmatched_left;
    if (monitor) monitor->record(cur);
    cur = eliminate(std::move(cur));
  }
  return cur;
}

std::string describe_key(const SparseFactor& f, std::size_t row, const VarSpace& space) {
  std::string out = "{";
  const auto key = f.key(row);
  for (std::size_t c = 0; c < f.width(); ++c) {
    if (c) out += ", ";
    out += space.name(f.scope()[c].id) + "=" + std::to_string(key[c]);
  }
  return out + "}";
}

std::vector<std::string> sorted_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) { return natural_less(a, b); });
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool has_root_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string first;
    if (words >> first && first == "root") return true;
  }
  return false;
}

// Everything needed to run CTE over a list of level factors.
struct LevelPlan {
  Hypergraph h;
  std::vector<VarId> node_vars;
  std::vector<NodeId> free_nodes;
  std::vector<VarId> free_ids;
};

LevelPlan plan_level(const FlatLevel& level, const std::vector<std::string>& free, const VarSpace& space) {
  LevelPlan p;
  p.h = build_hypergraph(level, [&](const std::string& n) { return space.card(space.id(n)); });
  for (const auto& n : p.h.names) p.node_vars.push_back(space.id(n));
  for (const auto& n : free) {
    p.free_ids.push_back(space.id(n));
    if (auto node = p.h.node(n)) p.free_nodes.push_back(*node);
  }
  std::sort(p.free_ids.begin(), p.free_ids.end());
  return p;
}

void require_valid(const TreeDecomposition& td, const Hypergraph& h, std::size_t level) {
  const auto violations = validate(td, h);
  if (violations.empty()) return;
  std::string msg = "level " + std::to_string(level) + " decomposition is invalid:";
  for (const auto& v : violations) msg += "\n  " + v.message;
  throw ValidationError(msg);
}

// A nonzero numerator must never meet a zero denominator. The numerator's
// support over the shared variables is computed exactly; each supported key
// needs a nonzero denominator entry for every completion of the variables
// only the denominator has.
void check_division(const FlatLevel& parent, const FlatLevel& child, std::span<const SparseFactor> parent_factors,
                    const SparseFactor& output, const VarSpace& space, const std::set<VarId>& pinned,
                    TableMonitor& monitor) {
  std::vector<std::string> shared;
  for (const auto& v : child.numerator_free_vars) {
    if (std::find(child.free_vars.begin(), child.free_vars.end(), v) != child.free_vars.end()) shared.push_back(v);
  }
  double expected = 1.0;
  for (const auto& v : child.free_vars) {
    const bool in_numerator =
        std::find(child.numerator_free_vars.begin(), child.numerator_free_vars.end(), v) !=
        child.numerator_free_vars.end();
    const VarId id = space.id(v);
    if (!in_numerator && !pinned.count(id)) expected *= space.card(id);
  }

  FlatLevel sub;
  std::vector<SparseFactor> sub_factors;
  for (std::size_t i : child.numerator_factors) {
    sub.factors.push_back(parent.factors.at(i));
    sub_factors.push_back(parent_factors[i]);
  }
  LevelPlan plan = plan_level(sub, shared, space);
  DecomposeOptions dopts;
  dopts.free_nodes = plan.free_nodes;
  const TreeDecomposition td = decompose(plan.h, dopts);
  CteOptions copts;
  copts.monitor = &monitor;
  const SparseFactor support = cte(td, sub_factors, plan.node_vars, plan.free_ids, copts);

  FactorBuilder ones(std::vector<ScopeVar>(output.scope().begin(), output.scope().end()));
  ones.reserve(output.size());
  for (std::size_t r = 0; r < output.size(); ++r) ones.add(output.key(r), 1.0);
  const SparseFactor counts = project(std::move(ones).finish(true), plan.free_ids);

  for (std::size_t r = 0; r < support.size(); ++r) {
    if (counts.lookup(support.key(r)) < expected) {
      throw DivisionInconsistency("a denominator of level " + std::to_string(parent.id) +
                                  " is 0 where its numerator is not, at " + describe_key(support, r, space));
    }
  }
}

double log10_sum(const std::vector<double>& logs) {
  if (logs.empty()) return 0.0;
  const double top = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double x : logs) s += std::pow(10.0, x - top);
  return top + std::log10(s);
}

}  // namespace

void TableMonitor::record(const SparseFactor& f) {
  if (f.size() > cap_) {
    throw ResourceLimitExceeded("table of " + std::to_string(f.size()) + " entries exceeds the cap of " +
                                std::to_string(cap_));
  }
  const std::size_t bytes = f.size() * entry_bytes(f.width());
  max_entries_ = std::max(max_entries_, f.size());
  max_bytes_ = std::max(max_bytes_, bytes);
  total_entries_ += f.size();
  total_bytes_ += bytes;
  ++tables_;
}

std::optional<std::size_t> max_entries_from_env() {
  const char* raw = std::getenv("PIHTE_MAX_ENTRIES");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) throw ValidationError("PIHTE_MAX_ENTRIES must be a positive integer");
  return static_cast<std::size_t>(v);
}

SparseFactor cte(const TreeDecomposition& td, std::span<const SparseFactor> factors,
                 std::span<const VarId> node_vars, std::span<const VarId> free_vars, const CteOptions& options) {
  const std::size_t m = td.clusters.size();
  if (m == 0) throw ValidationError("decomposition has no clusters");
  if (td.root >= m) throw ValidationError("root is not a cluster");
  if (td.edges.size() != m - 1) throw ValidationError("cluster graph is not a tree");

  std::vector<std::vector<VarId>> chi(m);
  for (std::size_t c = 0; c < m; ++c) {
    for (NodeId n : td.clusters[c].chi) {
      if (n >= node_vars.size()) throw ValidationError("cluster refers to an unknown node");
      chi[c].push_back(node_vars[n]);
    }
    std::sort(chi[c].begin(), chi[c].end());
  }
  std::vector<int> owners(factors.size(), 0);
  for (std::size_t c = 0; c < m; ++c) {
    for (FactorId f : td.clusters[c].psi) {
      if (f >= factors.size()) throw UnboundFactor("factor " + std::to_string(f) + " has no table");
      ++owners[f];
      for (const ScopeVar& v : factors[f].scope()) {
        if (!std::binary_search(chi[c].begin(), chi[c].end(), v.id)) {
          throw ValidationError("factor " + std::to_string(f) + " does not fit cluster " + std::to_string(c));
        }
      }
    }
  }
  for (std::size_t f = 0; f < owners.size(); ++f) {
    if (owners[f] != 1) throw ValidationError("factor " + std::to_string(f) + " is not placed exactly once");
  }

  const auto adj = td.adjacency();
  std::vector<std::size_t> order{td.root};
  std::vector<std::size_t> parent(m, m);
  std::vector<bool> seen(m, false);
  seen[td.root] = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t v : adj[order[i]]) {
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = order[i];
        order.push_back(v);
      }
    }
  }
  if (order.size() != m) throw ValidationError("cluster graph is not connected");

  std::vector<VarId> free(free_vars.begin(), free_vars.end());
  std::sort(free.begin(), free.end());

  std::vector<SparseFactor> messages(m);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t c = *it;
    std::vector<VarId> keep = free;
    if (parent[c] != m) {
      const auto& up = chi[parent[c]];
      std::vector<VarId> sep;
      std::set_intersection(chi[c].begin(), chi[c].end(), up.begin(), up.end(), std::back_inserter(sep));
      keep.insert(keep.end(), sep.begin(), sep.end());
      std::sort(keep.begin(), keep.end());
      keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    }
    std::vector<PoolItem> pool;
    for (FactorId f : td.clusters[c].psi) {
      pool.push_back({&factors[f], options.inverse != nullptr && (*options.inverse)[f]});
    }
    for (std::size_t v : adj[c]) {
      if (parent[v] == c) pool.push_back({&messages[v], false});
    }
    messages[c] = combine(std::move(pool), keep, options);
    for (std::size_t v : adj[c]) {
      if (parent[v] == c) messages[v] = SparseFactor();
    }
  }
  return std::move(messages[td.root]);
}

VarSpace hierarchy_space(const Hierarchy& hier, const Dataset& data) {
  VarSpace space;
  for (std::size_t c = 0; c < data.columns.size(); ++c) space.add(data.columns[c], data.domain_sizes[c]);
  auto add = [&](const std::string& name) {
    if (space.find(name)) return;
    const std::string base = base_name(name);
    auto id = space.find(base);
    if (!id) throw UnknownVariable("'" + base + "' is not a dataset column");
    space.add(name, space.card(*id));
  };
  for (const auto& level : hier.levels) {
    for (const auto& f : level.factors) {
      for (const auto& n : f.scope) add(n);
    }
    for (const auto& n : level.free_vars) add(n);
  }
  return space;
}

std::vector<std::string> infer_do_vars(const Hierarchy& hier, const std::optional<Query>& query) {
  if (query) return sorted_names(query->do_vars);
  std::set<std::string> on_left;
  for (const auto& level : hier.levels) {
    for (const auto& f : level.factors) {
      if (f.kind == LevelFactor::Kind::kProb) on_left.insert(f.term.left.begin(), f.term.left.end());
    }
  }
  std::vector<std::string> out;
  for (const auto& v : hier.levels.at(hier.root).free_vars) {
    if (!on_left.count(v)) out.push_back(v);
  }
  return sorted_names(out);
}

std::vector<std::string> infer_outcome(const Hierarchy& hier, const std::optional<Query>& query) {
  if (query) return sorted_names(query->outcome);
  const auto dos = infer_do_vars(hier, query);
  std::vector<std::string> out;
  for (const auto& v : hier.levels.at(hier.root).free_vars) {
    if (std::find(dos.begin(), dos.end(), v) == dos.end()) out.push_back(v);
  }
  return sorted_names(out);
}

SparseFactor renormalize(const SparseFactor& f, std::span<const VarId> outcome) {
  std::vector<VarId> present;
  for (VarId v : outcome) {
    if (f.has_var(v)) present.push_back(v);
  }
  if (present.empty()) return f;
  return product(f, invert(marginalize(f, present)));
}

namespace {

void check_do_assignment(const std::map<std::string, State>& assignment, const std::vector<std::string>& free,
                         const VarSpace& space) {
  for (const auto& [name, value] : assignment) {
    if (std::find(free.begin(), free.end(), name) == free.end()) {
      throw UnknownVariable("do variable '" + name + "' is not free in the estimand");
    }
    if (value >= space.card(space.id(name))) {
      throw ValidationError("do value " + std::to_string(value) + " is outside the domain of '" + name + "'");
    }
  }
}

}  // namespace

EvalReport pi_hte(const Hierarchy& hier, const Dataset& data, const EvalOptions& options) {
  const auto run_start = Clock::now();
  reset_underflow_drop_count();
  if (data.n_rows == 0) throw EmptyDataset("dataset has no rows");

  EvalReport report;
  report.space = hierarchy_space(hier, data);
  const VarSpace& space = report.space;
  const FlatLevel& root_level = hier.levels.at(hier.root);
  report.free_vars = sorted_names(root_level.free_vars);
  check_do_assignment(options.do_assignment, report.free_vars, space);
  report.do_vars = infer_do_vars(hier, options.query);
  report.outcome = options.outcome.empty() ? infer_outcome(hier, options.query) : sorted_names(options.outcome);
  for (const auto& v : report.outcome) {
    if (std::find(report.free_vars.begin(), report.free_vars.end(), v) == report.free_vars.end()) {
      throw UnknownVariable("outcome '" + v + "' is not free in the estimand");
    }
  }
  report.n_rows = data.n_rows;

  std::set<VarId> pinned;
  for (const auto& [name, value] : options.do_assignment) pinned.insert(space.id(name));

  std::map<std::size_t, SparseFactor> inverted;
  std::optional<std::vector<ScopeVar>> widest;  // scope of the widest input table

  auto column_of = [&](const std::string& name) {
    auto col = data.column_index(base_name(name));
    if (!col) throw UnknownVariable("'" + base_name(name) + "' is not a dataset column");
    return *col;
  };

  for (std::size_t id : hier.bottom_up_order()) {
    const auto level_start = Clock::now();
    const FlatLevel& level = hier.levels[id];
    LevelReport lr;
    lr.level = id;
    lr.parent = level.parent;
    lr.n_factors = level.factors.size();
    TableMonitor level_monitor(options.max_entries);

    std::vector<SparseFactor> factors;
    std::vector<bool> inverse;
    for (const auto& f : level.factors) {
      if (f.kind == LevelFactor::Kind::kChildOutput) {
        factors.push_back(inverted.at(f.child));
        inverse.push_back(true);
        continue;
      }
      std::vector<ColumnBinding> left;
      std::vector<ColumnBinding> right;
      for (const auto& n : f.term.left) left.push_back({column_of(n), space.scope_var(space.id(n))});
      for (const auto& n : f.term.right) right.push_back({column_of(n), space.scope_var(space.id(n))});
      SparseFactor table = empirical_prob(data, left, right);
      for (const auto& [name, value] : options.do_assignment) {
        const VarId v = space.id(name);
        if (table.has_var(v)) table = restrict_to(table, v, value);
      }
      level_monitor.record(table);
      report.t = std::max(report.t, table.size());
      if (!widest || table.width() > widest->size()) widest.emplace(table.scope().begin(), table.scope().end());
      factors.push_back(std::move(table));
      inverse.push_back(false);
    }
    for (const auto& f : factors) lr.t = std::max(lr.t, f.size());

    if (options.check_division) {
      for (std::size_t child : level.children) {
        const auto& out = hier.levels[child];
        auto it = std::find_if(level.factors.begin(), level.factors.end(), [&](const LevelFactor& f) {
          return f.kind == LevelFactor::Kind::kChildOutput && f.child == child;
        });
        const std::size_t slot = static_cast<std::size_t>(it - level.factors.begin());
        check_division(level, out, factors, invert(factors[slot]), space, pinned, level_monitor);
      }
    }

    LevelPlan plan = plan_level(level, level.free_vars, space);
    TreeDecomposition td;
    if (auto text = options.decomposition_text.find(id); text != options.decomposition_text.end()) {
      td = parse_decomposition(text->second, plan.h);
      if (!has_root_line(text->second)) select_root(td, plan.free_nodes);
    } else {
      DecomposeOptions dopts;
      dopts.restarts = options.restarts;
      dopts.seed = options.seed;
      dopts.free_nodes = plan.free_nodes;
      td = decompose(plan.h, dopts);
    }
    require_valid(td, plan.h, id);

    CteOptions copts;
    copts.monitor = &level_monitor;
    copts.inverse = &inverse;
    copts.dropped_unmatched = &lr.dropped_unmatched;
    copts.greedy = options.greedy;
    SparseFactor output = cte(td, factors, plan.node_vars, plan.free_ids, copts);

    lr.n_vars = plan.h.num_nodes();
    for (std::uint32_t c : plan.h.cards) lr.k = std::max(lr.k, c);
    lr.treewidth = td.stats.treewidth;
    lr.hyperwidth = td.stats.hyperwidth;
    lr.hyperwidth_without_child = td.stats.hyperwidth_without_child;
    lr.method = td.method;
    lr.decomposition = format_decomposition(td, plan.h);
    const LevelWidths widths{lr.n_vars, lr.k, lr.treewidth, lr.hyperwidth};
    const BoundReport bounds = predicted_bounds(std::span(&widths, 1), static_cast<double>(std::max<std::size_t>(lr.t, 1)));
    lr.log10_time_tw = bounds.log10_time_tw;
    lr.log10_time_hw = bounds.log10_time_hw.value_or(0.0);
    lr.output_entries = output.size();

    if (level.parent) {
      SparseFactor inv = invert(output);
      level_monitor.record(inv);
      inverted[id] = std::move(inv);
    } else {
      report.raw = std::move(output);
    }
    lr.max_table_entries = level_monitor.max_entries();
    lr.total_entries = level_monitor.total_entries();
    report.max_table_entries = std::max(report.max_table_entries, lr.max_table_entries);
    report.total_entries += lr.total_entries;
    report.max_table_bytes = std::max(report.max_table_bytes, level_monitor.max_bytes());
    report.dropped_unmatched += lr.dropped_unmatched;
    report.hierarchy_bound_exponent += lr.hyperwidth;
    report.max_level_hyperwidth = std::max(report.max_level_hyperwidth, lr.hyperwidth);
    lr.wall_time = seconds_since(level_start);
    report.levels.push_back(std::move(lr));
  }

  if (options.renormalize) {
    std::vector<VarId> outcome;
    for (const auto& v : report.outcome) outcome.push_back(space.id(v));
    report.result = renormalize(report.raw, outcome);
    report.renormalized = !outcome.empty();
  } else {
    report.result = report.raw;
  }
  if (widest) {
    report.density = static_cast<double>(report.max_table_entries) / dense_size(*widest);
  }
  if (report.t > 1 && report.max_table_entries > 0) {
    report.realized_exponent =
        std::log(static_cast<double>(report.max_table_entries)) / std::log(static_cast<double>(report.t));
  }
  report.underflow_drops = underflow_drop_count();
  report.wall_time = seconds_since(run_start);
  return report;
}

SparseFactor brute_force_eval(const Hierarchy& hier, const Dataset& data,
                              const std::map<std::string, State>& do_assignment, double dense_limit) {
  if (data.n_rows == 0) throw EmptyDataset("dataset has no rows");
  VarSpace space;
  for (std::size_t c = 0; c < data.columns.size(); ++c) space.add(data.columns[c], data.domain_sizes[c]);
  const auto free = sorted_names(hier.levels.at(hier.root).free_vars);
  for (const auto& v : free) {
    if (!space.find(v)) throw UnknownVariable("'" + v + "' is not a dataset column");
  }
  check_do_assignment(do_assignment, free, space);
  const Bindings bindings = bind_empirical(*hier.source, data, space);
  return dense_expr_table(*hier.source, bindings, space, dense_limit, do_assignment);
}

FactorDiff compare_factors(const SparseFactor& a, const SparseFactor& b) {
  FactorDiff d;
  if (!std::equal(a.scope().begin(), a.scope().end(), b.scope().begin(), b.scope().end())) {
    d.same_scope = false;
    d.max_abs = d.max_rel = std::numeric_limits<double>::infinity();
    return d;
  }
  auto account = [&](double x, double y) {
    const double diff = std::abs(x - y);
    const double scale = std::max(std::abs(x), std::abs(y));
    d.max_abs = std::max(d.max_abs, diff);
    if (scale > 0.0) d.max_rel = std::max(d.max_rel, diff / scale);
    ++d.cells;
  };
  for (std::size_t r = 0; r < a.size(); ++r) account(a.value(r), b.lookup(a.key(r)));
  for (std::size_t r = 0; r < b.size(); ++r) {
    if (a.lookup(b.key(r)) == 0.0) account(0.0, b.value(r));
  }
  return d;
}

BoundReport predicted_bounds(std::span<const LevelWidths> levels, std::optional<double> t) {
  BoundReport out;
  std::vector<double> tw_times;
  std::vector<double> hw_times;
  for (const auto& lw : levels) {
    LevelBound b;
    const double log_n = std::log10(static_cast<double>(std::max<std::size_t>(lw.n_vars, 1)));
    b.log10_table_tw = static_cast<double>(lw.treewidth + 1) * std::log10(static_cast<double>(lw.k));
    b.log10_time_tw = log_n + b.log10_table_tw;
    if (t) {
      const double tt = std::max(*t, 1.0);
      b.log10_table_hw = static_cast<double>(lw.hyperwidth) * std::log10(tt);
      double time = log_n;
      if (tt > 1.0 && lw.hyperwidth > 0) {
        time = log_n + std::log10(static_cast<double>(lw.hyperwidth)) + std::log10(std::log2(tt)) + *b.log10_table_hw;
      }
      b.log10_time_hw = std::max(time, log_n);
      hw_times.push_back(*b.log10_time_hw);
    }
    tw_times.push_back(b.log10_time_tw);
    out.exponent_sum += lw.hyperwidth;
    out.exponent_max = std::max(out.exponent_max, lw.hyperwidth);
    out.levels.push_back(b);
  }
  out.log10_time_tw = log10_sum(tw_times);
  if (t) {
    out.log10_time_hw = log10_sum(hw_times);
    out.hw_tighter = *out.log10_time_hw < out.log10_time_tw;
  }
  return out;
}

AnalysisReport analyze_hierarchy(const Hierarchy& hier,
                                 const std::function<std::uint32_t(const std::string&)>& card_of,
                                 const AnalyzeOptions& options) {
  AnalysisReport report;
  report.depth = hier.depth();
  report.warnings = hier.warnings;
  report.t = options.t;
  std::vector<LevelWidths> widths;
  for (const FlatLevel& level : hier.levels) {
    LevelAnalysis la;
    la.level = level.id;
    la.parent = level.parent;
    la.sum_vars = level.sum_vars;
    la.free_vars = level.free_vars;
    for (const auto& f : level.factors) {
      if (f.kind == LevelFactor::Kind::kProb) {
        la.factors.push_back(to_string(*Expr::make_prob(f.term)));
      } else {
        std::string args;
        for (const auto& v : f.scope) args += (args.empty() ? "" : ",") + v;
        la.factors.push_back("1/O" + std::to_string(f.child) + "(" + args + ")");
      }
    }
    la.hypergraph = build_hypergraph(level, card_of);
    std::vector<NodeId> free_nodes;
    for (const auto& v : level.free_vars) {
      if (auto n = la.hypergraph.node(v)) free_nodes.push_back(*n);
    }
    if (auto text = options.decomposition_text.find(level.id); text != options.decomposition_text.end()) {
      la.decomposition = parse_decomposition(text->second, la.hypergraph);
      if (!has_root_line(text->second)) select_root(la.decomposition, free_nodes);
    } else {
      DecomposeOptions dopts;
      dopts.restarts = options.restarts;
      dopts.seed = options.seed;
      dopts.free_nodes = free_nodes;
      la.decomposition = decompose(la.hypergraph, dopts);
    }
    require_valid(la.decomposition, la.hypergraph, level.id);
    for (std::uint32_t c : la.hypergraph.cards) la.k = std::max(la.k, c);
    widths.push_back({la.hypergraph.num_nodes(), la.k, la.decomposition.stats.treewidth,
                      la.decomposition.stats.hyperwidth});
    report.levels.push_back(std::move(la));
  }
  report.bounds = predicted_bounds(widths, options.t);
  return report;
}

MetricsRow run_metrics(const EvalReport& report) {
  MetricsRow row;
  row.samples = report.n_rows;
  row.time = std::max(report.wall_time, 0.0);
  row.max_table_size = report.max_table_entries;
  row.t = report.t;
  row.density = report.density;
  return row;
}

}  // namespace pihte
