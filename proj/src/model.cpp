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

#include "pihte/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pihte/errors.hpp"

namespace pihte {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

// Splits one CSV record into fields (RFC-4180 quoting).
std::vector<std::string> split_csv_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

}  // namespace

VarSpace::VarSpace(std::span<const Variable> vars) {
  for (const Variable& v : vars) add(v.name, v.domain_size);
}

VarId VarSpace::add(const std::string& name, std::uint32_t domain_size) {
  if (auto it = index_.find(name); it != index_.end()) {
    if (vars_[it->second].domain_size != domain_size) {
      throw ScopeConflict("variable '" + name + "' registered with domain sizes " +
                          std::to_string(vars_[it->second].domain_size) + " and " +
                          std::to_string(domain_size));
    }
    return it->second;
  }
  const auto id = static_cast<VarId>(vars_.size());
  vars_.push_back({name, domain_size});
  index_.emplace(name, id);
  return id;
}

std::optional<VarId> VarSpace::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VarId VarSpace::id(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw UnknownVariable("'" + std::string(name) + "'");
}

std::optional<std::size_t> CausalGraph::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> CausalGraph::parents(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const auto& [p, c] : directed_edges) {
    if (c == v) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> CausalGraph::topological_order() const {
  const std::size_t n = variables.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (const auto& [p, c] : directed_edges) {
    ++indegree[c];
    children[p].push_back(c);
  }
  // Smallest declared index first among ready nodes, for a stable order.
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t c : children[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (order.size() != n) {
    std::string cyc;
    for (std::size_t v = 0; v < n; ++v) {
      if (indegree[v] > 0) cyc += (cyc.empty() ? "" : ", ") + variables[v].name;
    }
    throw CycleError("directed cycle through {" + cyc + "}");
  }
  return order;
}

CausalGraph parse_graph(std::string_view text) {
  struct PendingEdge {
    std::string a, b;
    bool bidirected;
    std::size_t line;
  };
  CausalGraph graph;
  std::vector<PendingEdge> edges;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream stmts(raw);
    std::string stmt;
    while (std::getline(stmts, stmt, ';')) {
      auto tok = split_ws(stmt);
      if (tok.empty()) continue;
      const std::string where = "line " + std::to_string(line_no) + ": ";
      if (tok[0] == "var") {
        if (tok.size() != 3) throw ParseError(where + "expected 'var <name> <domain_size>'");
        if (!valid_identifier(tok[1])) throw ParseError(where + "bad variable name '" + tok[1] + "'");
        std::uint32_t k = 0;
        auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), k);
        if (ec != std::errc{} || p != tok[2].data() + tok[2].size() || k < 1) {
          throw ParseError(where + "domain size must be a positive integer, got '" + tok[2] + "'");
        }
        if (graph.index_of(tok[1])) throw ParseError(where + "variable '" + tok[1] + "' declared twice");
        graph.variables.push_back({tok[1], k});
      } else if (tok.size() == 3 && (tok[1] == "->" || tok[1] == "<->")) {
        edges.push_back({tok[0], tok[2], tok[1] == "<->", line_no});
      } else {
        throw ParseError(where + "unrecognized statement '" + stmt + "'");
      }
    }
  }
  for (const PendingEdge& e : edges) {
    auto a = graph.index_of(e.a);
    auto b = graph.index_of(e.b);
    if (!a || !b) {
      throw UnknownVariable("line " + std::to_string(e.line) + ": '" + (a ? e.b : e.a) +
                            "' is not declared");
    }
    if (*a == *b) throw ParseError("line " + std::to_string(e.line) + ": self loop on '" + e.a + "'");
    (e.bidirected ? graph.bidirected_edges : graph.directed_edges).emplace_back(*a, *b);
  }
  graph.topological_order();
  return graph;
}

CausalGraph load_graph(const std::filesystem::path& path) {
  return parse_graph(read_file(path));
}

std::string format_graph(const CausalGraph& graph) {
  std::ostringstream os;
  for (const Variable& v : graph.variables) os << "var " << v.name << ' ' << v.domain_size << '\n';
  for (const auto& [a, b] : graph.directed_edges) {
    os << graph.variables[a].name << " -> " << graph.variables[b].name << '\n';
  }
  for (const auto& [a, b] : graph.bidirected_edges) {
    os << graph.variables[a].name << " <-> " << graph.variables[b].name << '\n';
  }
  return os.str();
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

Dataset parse_dataset(std::string_view text, const CausalGraph& graph) {
  Dataset data;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_csv_record(line, line_no);
    if (!have_header) {
      for (auto& name : fields) {
        auto idx = graph.index_of(name);
        if (!idx) throw UnknownVariable("CSV column '" + name + "' is not a graph variable");
        if (data.column_index(name)) throw ParseError("CSV column '" + name + "' repeated");
        data.columns.push_back(name);
        data.domain_sizes.push_back(graph.variables[*idx].domain_size);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != data.columns.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(data.columns.size()) + " cells, got " +
                       std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      long long v = 0;
      const auto& f = fields[c];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size() || f.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": non-integer cell '" + f + "'");
      }
      if (v < 0 || v >= static_cast<long long>(data.domain_sizes[c])) {
        throw DomainViolation(data.n_rows + 1, data.columns[c], v);
      }
      data.cells.push_back(static_cast<State>(v));
    }
    ++data.n_rows;
  }
  if (!have_header) throw ParseError("CSV has no header row");
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, const CausalGraph& graph) {
  return parse_dataset(read_file(path), graph);
}

std::string format_dataset(const Dataset& data) {
  std::string out;
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += data.columns[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      if (c > 0) out += ',';
      out += std::to_string(data.at(r, c));
    }
    out += '\n';
  }
  return out;
}

std::size_t distinct_projection_count(const Dataset& data,
                                      std::span<const std::size_t> columns) {
  std::set<std::vector<State>> seen;
  std::vector<State> key(columns.size());
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) key[i] = data.at(r, columns[i]);
    seen.insert(key);
  }
  return seen.size();
}

SparseFactor empirical_prob(const Dataset& data,
                            std::span<const ColumnBinding> left,
                            std::span<const ColumnBinding> right) {
  if (data.n_rows == 0) throw EmptyDataset("cannot estimate probabilities from 0 rows");
  if (left.empty()) throw std::invalid_argument("empirical_prob: empty left set");

  // Combined scope in id order; remember which entries come from the right.
  struct Col {
    ColumnBinding binding;
    bool conditioning;
  };
  std::vector<Col> cols;
  for (const auto& b : left) cols.push_back({b, false});
  for (const auto& b : right) cols.push_back({b, true});
  std::sort(cols.begin(), cols.end(),
            [](const Col& a, const Col& b) { return a.binding.var.id < b.binding.var.id; });
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto& b = cols[i].binding;
    if (i > 0 && cols[i - 1].binding.var.id == b.var.id) {
      throw ScopeConflict("variable id " + std::to_string(b.var.id) +
                          " appears twice in one probability term");
    }
    if (b.column >= data.columns.size()) throw UnknownVariable("column index out of range");
    if (b.var.card != data.domain_sizes[b.column]) {
      throw ScopeConflict("column '" + data.columns[b.column] + "' has domain size " +
                          std::to_string(data.domain_sizes[b.column]) + ", factor expects " +
                          std::to_string(b.var.card));
    }
  }

  const std::size_t w = cols.size();
  std::vector<std::size_t> cond_pos;
  for (std::size_t i = 0; i < w; ++i) {
    if (cols[i].conditioning) cond_pos.push_back(i);
  }

  std::vector<State> keys(data.n_rows * w);
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    for (std::size_t i = 0; i < w; ++i) keys[r * w + i] = data.at(r, cols[i].binding.column);
  }
  auto row_less = [&](std::span<const std::size_t> pos) {
    return [&keys, w, pos](std::size_t a, std::size_t b) {
      for (std::size_t p : pos) {
        if (keys[a * w + p] != keys[b * w + p]) return keys[a * w + p] < keys[b * w + p];
      }
      return false;
    };
  };
  std::vector<std::size_t> all_pos(w);
  std::iota(all_pos.begin(), all_pos.end(), std::size_t{0});

  std::vector<std::size_t> order(data.n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), row_less(all_pos));

  // Counts of each conditioning configuration, sorted by key.
  std::vector<std::size_t> cond_order(order);
  std::stable_sort(cond_order.begin(), cond_order.end(), row_less(cond_pos));
  std::vector<std::vector<State>> cond_keys;
  std::vector<std::size_t> cond_counts;
  for (std::size_t i = 0; i < cond_order.size();) {
    std::size_t e = i + 1;
    auto less = row_less(cond_pos);
    while (e < cond_order.size() && !less(cond_order[i], cond_order[e])) ++e;
    std::vector<State> k;
    for (std::size_t p : cond_pos) k.push_back(keys[cond_order[i] * w + p]);
    cond_keys.push_back(std::move(k));
    cond_counts.push_back(e - i);
    i = e;
  }

  std::vector<ScopeVar> scope;
  for (const Col& c : cols) scope.push_back(c.binding.var);
  FactorBuilder builder(std::move(scope));
  auto less_all = row_less(all_pos);
  std::vector<State> ck(cond_pos.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t e = i + 1;
    while (e < order.size() && !less_all(order[i], order[e])) ++e;
    const std::size_t joint = e - i;
    for (std::size_t j = 0; j < cond_pos.size(); ++j) ck[j] = keys[order[i] * w + cond_pos[j]];
    auto it = std::lower_bound(cond_keys.begin(), cond_keys.end(), ck);
    const std::size_t denom = cond_pos.empty() ? data.n_rows : cond_counts[it - cond_keys.begin()];
    builder.add(std::span<const State>(keys.data() + order[i] * w, w),
                static_cast<double>(joint) / static_cast<double>(denom));
    i = e;
  }
  return std::move(builder).finish(/*already_sorted=*/true);
}

SparseFactor empirical_prob(const Dataset& data, const VarSpace& space,
                            std::span<const std::string> left,
                            std::span<const std::string> right) {
  auto bind = [&](std::span<const std::string> names) {
    std::vector<ColumnBinding> out;
    for (const auto& n : names) {
      auto col = data.column_index(n);
      if (!col) throw UnknownVariable("'" + n + "' is not a dataset column");
      out.push_back({*col, space.scope_var(space.id(n))});
    }
    return out;
  };
  const auto l = bind(left);
  const auto r = bind(right);
  return empirical_prob(data, l, r);
}

}  // namespace pihte
