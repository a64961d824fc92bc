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

#include "pihte/sparse_factor.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pihte/errors.hpp"

namespace pihte {
namespace {

std::atomic<std::size_t> g_underflow_drops{0};

bool keep_value(double v) {
  if (std::fabs(v) >= kUnderflowFloor) return true;
  if (v != 0.0) g_underflow_drops.fetch_add(1, std::memory_order_relaxed);
  return false;
}

// Lexicographic comparison of two rows restricted to `cols`.
struct ColumnLess {
  const State* keys;
  std::size_t width;
  std::span<const std::size_t> cols;
  bool operator()(std::size_t a, std::size_t b) const {
    const State* ka = keys + a * width;
    const State* kb = keys + b * width;
    for (std::size_t c : cols) {
      if (ka[c] != kb[c]) return ka[c] < kb[c];
    }
    return false;
  }
};

int compare_cols(const State* ka, std::span<const std::size_t> ca,
                 const State* kb, std::span<const std::size_t> cb) {
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ka[ca[i]] != kb[cb[i]]) return ka[ca[i]] < kb[cb[i]] ? -1 : 1;
  }
  return 0;
}

std::vector<std::size_t> all_columns(std::size_t width) {
  std::vector<std::size_t> cols(width);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

std::vector<std::size_t> sorted_rows(std::span<const State> keys,
                                     std::size_t width, std::size_t rows,
                                     std::span<const std::size_t> cols) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   ColumnLess{keys.data(), width, cols});
  return order;
}

}  // namespace

SparseFactor::SparseFactor() : values_{1.0} {}

SparseFactor SparseFactor::scalar(double value) {
  SparseFactor f;
  f.values_.clear();
  if (keep_value(value)) f.values_.push_back(value);
  return f;
}

SparseFactor SparseFactor::from_rows(std::vector<ScopeVar> scope,
                                     std::span<const State> keys,
                                     std::span<const double> values) {
  const std::size_t width = scope.size();
  if (keys.size() != values.size() * width) {
    throw std::invalid_argument("from_rows: key/value size mismatch");
  }
  std::vector<std::size_t> perm(width);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return scope[a].id < scope[b].id; });
  std::vector<ScopeVar> sorted_scope(width);
  for (std::size_t i = 0; i < width; ++i) sorted_scope[i] = scope[perm[i]];
  for (std::size_t i = 1; i < width; ++i) {
    if (sorted_scope[i].id == sorted_scope[i - 1].id) {
      throw ScopeConflict("variable id " + std::to_string(sorted_scope[i].id) +
                          " repeated in scope");
    }
  }
  FactorBuilder builder(std::move(sorted_scope));
  builder.reserve(values.size());
  std::vector<State> key(width);
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t i = 0; i < width; ++i) {
      key[i] = keys[r * width + perm[i]];
      if (key[i] >= scope[perm[i]].card) {
        throw std::invalid_argument("from_rows: state out of domain");
      }
    }
    builder.add(key, values[r]);
  }
  SparseFactor out = std::move(builder).finish();
  for (std::size_t r = 1; r < out.size(); ++r) {
    if (std::equal(out.key(r).begin(), out.key(r).end(), out.key(r - 1).begin())) {
      throw std::invalid_argument("from_rows: duplicate key");
    }
  }
  return out;
}

bool SparseFactor::has_var(VarId id) const noexcept {
  return position(id) != scope_.size();
}

std::size_t SparseFactor::position(VarId id) const noexcept {
  auto it = std::lower_bound(
      scope_.begin(), scope_.end(), id,
      [](const ScopeVar& v, VarId x) { return v.id < x; });
  if (it == scope_.end() || it->id != id) return scope_.size();
  return static_cast<std::size_t>(it - scope_.begin());
}

double SparseFactor::lookup(std::span<const State> key) const {
  const std::size_t w = width();
  std::size_t lo = 0;
  std::size_t hi = size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const State* row = keys_.data() + mid * w;
    if (std::lexicographical_compare(row, row + w, key.begin(), key.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size() && std::equal(key.begin(), key.end(), keys_.data() + lo * w)) {
    return values_[lo];
  }
  return 0.0;
}

double SparseFactor::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

FactorBuilder::FactorBuilder(std::vector<ScopeVar> sorted_scope) {
  out_.scope_ = std::move(sorted_scope);
  out_.values_.clear();
}

void FactorBuilder::reserve(std::size_t rows) {
  out_.keys_.reserve(rows * out_.scope_.size());
  out_.values_.reserve(rows);
}

void FactorBuilder::add(std::span<const State> key, double value) {
  if (!keep_value(value)) return;
  out_.keys_.insert(out_.keys_.end(), key.begin(), key.end());
  out_.values_.push_back(value);
}

SparseFactor FactorBuilder::finish(bool already_sorted) && {
  if (!already_sorted && out_.size() > 1) {
    const std::size_t w = out_.width();
    const auto cols = all_columns(w);
    auto order = sorted_rows(out_.keys_, w, out_.size(), cols);
    std::vector<State> keys(out_.keys_.size());
    std::vector<double> values(out_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      std::copy_n(out_.keys_.data() + order[i] * w, w, keys.data() + i * w);
      values[i] = out_.values_[order[i]];
    }
    out_.keys_ = std::move(keys);
    out_.values_ = std::move(values);
  }
  return std::move(out_);
}

std::vector<ScopeVar> scope_union(std::span<const ScopeVar> a,
                                  std::span<const ScopeVar> b) {
  std::vector<ScopeVar> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].id < b[j].id)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].id < a[i].id) {
      out.push_back(b[j++]);
    } else {
      if (a[i].card != b[j].card) {
        throw ScopeConflict("variable id " + std::to_string(a[i].id) +
                            " has domain sizes " + std::to_string(a[i].card) +
                            " and " + std::to_string(b[j].card));
      }
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  return out;
}

SparseFactor product(const SparseFactor& f, const SparseFactor& g,
                     const ProductLimits& limits,
                     ProductDiagnostics* diagnostics) {
  std::vector<ScopeVar> scope = scope_union(f.scope(), g.scope());
  const std::size_t wf = f.width();
  const std::size_t wg = g.width();

  std::vector<std::size_t> shared_f;
  std::vector<std::size_t> shared_g;
  for (std::size_t i = 0; i < wf; ++i) {
    const std::size_t j = g.position(f.scope()[i].id);
    if (j != wg) {
      shared_f.push_back(i);
      shared_g.push_back(j);
    }
  }

  // Source column of each output column: f column, or wf + g column.
  std::vector<std::size_t> source(scope.size());
  for (std::size_t c = 0; c < scope.size(); ++c) {
    const std::size_t pf = f.position(scope[c].id);
    source[c] = pf != wf ? pf : wf + g.position(scope[c].id);
  }

  const auto order_f = sorted_rows(f.keys(), wf, f.size(), shared_f);
  const auto order_g = sorted_rows(g.keys(), wg, g.size(), shared_g);

  struct GroupPair {
    std::size_t f_begin, f_end, g_begin, g_end;
  };
  std::vector<GroupPair> pairs;
  std::size_t out_rows = 0;
  std::size_t unmatched = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  const State* kf = f.keys().data();
  const State* kg = g.keys().data();
  while (i < order_f.size()) {
    std::size_t i_end = i + 1;
    while (i_end < order_f.size() &&
           compare_cols(kf + order_f[i] * wf, shared_f, kf + order_f[i_end] * wf,
                        shared_f) == 0) {
      ++i_end;
    }
    while (j < order_g.size() &&
           compare_cols(kg + order_g[j] * wg, shared_g, kf + order_f[i] * wf,
                        shared_f) < 0) {
      ++j;
    }
    std::size_t j_end = j;
    while (j_end < order_g.size() &&
           compare_cols(kg + order_g[j_end] * wg, shared_g, kf + order_f[i] * wf,
                        shared_f) == 0) {
      ++j_end;
    }
    if (j_end > j) {
      pairs.push_back({i, i_end, j, j_end});
      out_rows += (i_end - i) * (j_end - j);
      if (out_rows > limits.max_entries) {
        throw ResourceLimitExceeded(
            "product would materialize more than " +
            std::to_string(limits.max_entries) + " entries");
      }
    } else {
      unmatched += i_end - i;
    }
    i = i_end;
  }
  if (diagnostics != nullptr) diagnostics->unmatched_left += unmatched;

  FactorBuilder builder(scope);
  builder.reserve(out_rows);
  std::vector<State> key(scope.size());
  for (const GroupPair& p : pairs) {
    for (std::size_t a = p.f_begin; a < p.f_end; ++a) {
      const State* rf = kf + order_f[a] * wf;
      for (std::size_t b = p.g_begin; b < p.g_end; ++b) {
        const State* rg = kg + order_g[b] * wg;
        for (std::size_t c = 0; c < scope.size(); ++c) {
          key[c] = source[c] < wf ? rf[source[c]] : rg[source[c] - wf];
        }
        const double v = f.value(order_f[a]) * g.value(order_g[b]);
        // Stored values are nonzero, so an exact zero here is an underflow.
        if (v == 0.0) {
          g_underflow_drops.fetch_add(1, std::memory_order_relaxed);
          continue;
        }
        builder.add(key, v);
      }
    }
  }
  return std::move(builder).finish();
}

SparseFactor project(const SparseFactor& f, std::span<const VarId> keep) {
  std::vector<std::size_t> cols;
  std::vector<ScopeVar> scope;
  for (std::size_t c = 0; c < f.width(); ++c) {
    if (std::find(keep.begin(), keep.end(), f.scope()[c].id) != keep.end()) {
      cols.push_back(c);
      scope.push_back(f.scope()[c]);
    }
  }
  if (cols.size() == f.width()) return f;

  const std::size_t w = f.width();
  const auto order = sorted_rows(f.keys(), w, f.size(), cols);
  FactorBuilder builder(scope);
  std::vector<State> key(cols.size());
  const State* keys = f.keys().data();
  std::size_t i = 0;
  while (i < order.size()) {
    double sum = 0.0;
    std::size_t e = i;
    while (e < order.size() &&
           compare_cols(keys + order[i] * w, cols, keys + order[e] * w, cols) == 0) {
      sum += f.value(order[e]);
      ++e;
    }
    for (std::size_t c = 0; c < cols.size(); ++c) key[c] = keys[order[i] * w + cols[c]];
    builder.add(key, sum);
    i = e;
  }
  return std::move(builder).finish(/*already_sorted=*/true);
}

SparseFactor marginalize(const SparseFactor& f, std::span<const VarId> out_vars) {
  for (VarId v : out_vars) {
    if (!f.has_var(v)) {
      throw UnknownVariable("cannot sum out variable id " + std::to_string(v) +
                            ": not in scope");
    }
  }
  std::vector<VarId> keep;
  for (const ScopeVar& v : f.scope()) {
    if (std::find(out_vars.begin(), out_vars.end(), v.id) == out_vars.end()) {
      keep.push_back(v.id);
    }
  }
  return project(f, keep);
}

SparseFactor invert(const SparseFactor& f) {
  FactorBuilder builder(std::vector<ScopeVar>(f.scope().begin(), f.scope().end()));
  builder.reserve(f.size());
  for (std::size_t r = 0; r < f.size(); ++r) builder.add(f.key(r), 1.0 / f.value(r));
  return std::move(builder).finish(/*already_sorted=*/true);
}

SparseFactor restrict_to(const SparseFactor& f, VarId var, State state) {
  const std::size_t pos = f.position(var);
  if (pos == f.width()) return f;
  FactorBuilder builder(std::vector<ScopeVar>(f.scope().begin(), f.scope().end()));
  for (std::size_t r = 0; r < f.size(); ++r) {
    if (f.key(r)[pos] == state) builder.add(f.key(r), f.value(r));
  }
  return std::move(builder).finish(/*already_sorted=*/true);
}

SparseFactor relabel(const SparseFactor& f,
                     const std::function<VarId(VarId)>& relabel_fn) {
  std::vector<ScopeVar> scope(f.scope().begin(), f.scope().end());
  for (ScopeVar& v : scope) v.id = relabel_fn(v.id);
  return SparseFactor::from_rows(std::move(scope), f.keys(), f.values());
}

double dense_eval(const SparseFactor& f, std::span<const State> assignment) {
  std::vector<State> key(f.width());
  for (std::size_t c = 0; c < f.width(); ++c) {
    const VarId id = f.scope()[c].id;
    if (id >= assignment.size() || assignment[id] == kUnassigned) {
      throw IncompleteAssignment("variable id " + std::to_string(id) +
                                 " is unassigned");
    }
    key[c] = assignment[id];
  }
  return f.lookup(key);
}

double dense_size(std::span<const ScopeVar> scope) {
  double n = 1.0;
  for (const ScopeVar& v : scope) n *= static_cast<double>(v.card);
  return n;
}

FactorStats stats(const SparseFactor& f) {
  return {f.size(), static_cast<double>(f.size()) / dense_size(f.scope())};
}

std::size_t underflow_drop_count() noexcept {
  return g_underflow_drops.load(std::memory_order_relaxed);
}

void reset_underflow_drop_count() noexcept {
  g_underflow_drops.store(0, std::memory_order_relaxed);
}

std::string to_debug_string(const SparseFactor& f,
                            const std::function<std::string(VarId)>& name_of) {
  std::ostringstream os;
  os << "scope:";
  for (std::size_t c = 0; c < f.width(); ++c) {
    os << (c == 0 ? " " : ",") << name_of(f.scope()[c].id) << ':'
       << f.scope()[c].card;
  }
  os << '\n';
  char buf[64];
  for (std::size_t r = 0; r < f.size(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) {
      if (c > 0) os << ',';
      os << f.key(r)[c];
    }
    std::snprintf(buf, sizeof buf, "%.17g", f.value(r));
    os << '=' << buf << '\n';
  }
  return os.str();
}

SparseFactor from_debug_string(
    const std::string& text,
    const std::function<VarId(const std::string&)>& id_of) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("scope:", 0) != 0) {
    throw ParseError("factor text must start with 'scope:'");
  }
  std::vector<ScopeVar> scope;
  std::istringstream header(line.substr(6));
  std::string item;
  while (std::getline(header, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    if (b == std::string::npos) continue;
    item = item.substr(b);
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ParseError("scope item '" + item + "'");
    scope.push_back({id_of(item.substr(0, colon)),
                     static_cast<std::uint32_t>(std::stoul(item.substr(colon + 1)))});
  }
  std::vector<State> keys;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("row without '=': " + line);
    std::istringstream cells(line.substr(0, eq));
    std::size_t n = 0;
    while (std::getline(cells, item, ',')) {
      if (item.empty()) continue;
      keys.push_back(static_cast<State>(std::stoul(item)));
      ++n;
    }
    if (n != scope.size()) throw ParseError("row arity mismatch: " + line);
    values.push_back(std::stod(line.substr(eq + 1)));
  }
  return SparseFactor::from_rows(std::move(scope), keys, values);
}

}  // namespace pihte
