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

#include "pihte/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace pihte {
namespace {

using nlohmann::ordered_json;

ordered_json factor_object(const SparseFactor& f, const VarSpace& space) {
  ordered_json j;
  j["scope"] = ordered_json::array();
  for (const ScopeVar& v : f.scope()) j["scope"].push_back(space.name(v.id));
  j["rows"] = ordered_json::array();
  for (std::size_t r = 0; r < f.size(); ++r) {
    ordered_json row = ordered_json::array();
    for (State s : f.key(r)) row.push_back(s);
    row.push_back(f.value(r));
    j["rows"].push_back(std::move(row));
  }
  return j;
}

ordered_json optional_number(const std::optional<std::size_t>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string names(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& n : v) out += (out.empty() ? "" : ",") + n;
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string factor_json(const SparseFactor& f, const VarSpace& space) { return factor_object(f, space).dump(); }

std::string report_json(const EvalReport& report, const std::map<std::string, State>& do_assignment,
                        bool include_timing) {
  ordered_json j;
  j["free_vars"] = report.free_vars;
  j["outcome"] = report.outcome;
  j["do_vars"] = report.do_vars;
  j["do_assignment"] = ordered_json::object();
  for (const auto& [k, v] : do_assignment) j["do_assignment"][k] = v;
  j["renormalized"] = report.renormalized;
  j["result"] = factor_object(report.result, report.space);
  j["raw"] = factor_object(report.raw, report.space);
  j["levels"] = ordered_json::array();
  for (const auto& lr : report.levels) {
    ordered_json l;
    l["level"] = lr.level;
    l["parent"] = optional_number(lr.parent);
    l["n_factors"] = lr.n_factors;
    l["n_vars"] = lr.n_vars;
    l["k"] = lr.k;
    l["t"] = lr.t;
    l["treewidth"] = lr.treewidth;
    l["hyperwidth"] = lr.hyperwidth;
    l["hyperwidth_without_child"] = optional_number(lr.hyperwidth_without_child);
    l["method"] = lr.method;
    l["log10_predicted_time_tw"] = lr.log10_time_tw;
    l["log10_predicted_time_hw"] = lr.log10_time_hw;
    l["max_table_entries"] = lr.max_table_entries;
    l["total_entries"] = lr.total_entries;
    l["output_entries"] = lr.output_entries;
    l["dropped_unmatched"] = lr.dropped_unmatched;
    if (include_timing) l["wall_time"] = lr.wall_time;
    l["decomposition"] = lr.decomposition;
    j["levels"].push_back(std::move(l));
  }
  const MetricsRow m = run_metrics(report);
  ordered_json metrics;
  metrics["samples"] = m.samples;
  if (include_timing) metrics["time"] = m.time;
  metrics["max_table_size"] = m.max_table_size;
  metrics["t"] = m.t;
  metrics["density"] = m.density;
  j["metrics"] = metrics;
  j["max_table_entries"] = report.max_table_entries;
  j["total_entries"] = report.total_entries;
  j["max_table_bytes"] = report.max_table_bytes;
  j["dropped_unmatched"] = report.dropped_unmatched;
  j["underflow_drops"] = report.underflow_drops;
  j["hierarchy_bound_exponent"] = report.hierarchy_bound_exponent;
  j["max_level_hyperwidth"] = report.max_level_hyperwidth;
  j["realized_exponent"] = report.realized_exponent;
  if (include_timing) j["wall_time"] = report.wall_time;
  return j.dump(2) + "\n";
}

std::string metrics_csv_header() { return "samples,time,max_table_size,t,density"; }

std::string metrics_csv_row(const MetricsRow& row) {
  char density[32];
  std::snprintf(density, sizeof density, "%.2e", row.density);
  return std::to_string(row.samples) + "," + fixed(std::max(row.time, 0.0), 3) + "," +
         std::to_string(row.max_table_size) + "," + std::to_string(row.t) + "," + density;
}

std::string analysis_text(const AnalysisReport& report) {
  std::ostringstream os;
  os << "depth " << report.depth << ", " << report.levels.size() << " level" << (report.levels.size() == 1 ? "" : "s")
     << "\n";
  for (const auto& w : report.warnings) os << "warning: " << w << "\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& la = report.levels[i];
    const auto& st = la.decomposition.stats;
    os << "\nlevel " << la.level;
    if (la.parent) os << " (parent " << *la.parent << ")";
    os << ": " << la.factors.size() << " factors, " << la.hypergraph.num_nodes() << " variables\n";
    os << "  sum over {" << names(la.sum_vars) << "}, free {" << names(la.free_vars) << "}\n";
    for (std::size_t f = 0; f < la.factors.size(); ++f) os << "  F" << f << " = " << la.factors[f] << "\n";
    os << "  decomposition (" << la.decomposition.method << "): hw=" << st.hyperwidth << " w=" << st.treewidth
       << " clusters=" << st.n_clusters;
    if (st.hyperwidth_without_child && *st.hyperwidth_without_child != st.hyperwidth) {
      os << " hw_without_child=" << *st.hyperwidth_without_child;
    } else if (!st.hyperwidth_without_child) {
      os << " hw_without_child=none";
    }
    os << "\n";
    std::istringstream td(format_decomposition(la.decomposition, la.hypergraph));
    for (std::string line; std::getline(td, line);) os << "    " << line << "\n";
    const auto& b = report.bounds.levels[i];
    os << "  bound: tw table 10^" << fixed(b.log10_table_tw, 1) << ", tw time 10^" << fixed(b.log10_time_tw, 1);
    if (b.log10_time_hw) {
      os << ", hw table 10^" << fixed(*b.log10_table_hw, 1) << ", hw time 10^" << fixed(*b.log10_time_hw, 1);
    } else {
      os << ", hw table t^" << st.hyperwidth;
    }
    os << "\n";
  }
  os << "\nhyperwidth exponent: sum " << report.bounds.exponent_sum << ", max " << report.bounds.exponent_max << "\n";
  if (report.bounds.hw_tighter) {
    os << "tighter bound: " << (*report.bounds.hw_tighter ? "hyperwidth" : "treewidth") << "\n";
  }
  return os.str();
}

std::string analysis_json(const AnalysisReport& report) {
  ordered_json j;
  j["depth"] = report.depth;
  j["warnings"] = report.warnings;
  j["t"] = optional_number(report.t);
  j["levels"] = ordered_json::array();
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& la = report.levels[i];
    const auto& st = la.decomposition.stats;
    const auto& b = report.bounds.levels[i];
    ordered_json l;
    l["level"] = la.level;
    l["parent"] = optional_number(la.parent);
    l["factors"] = la.factors;
    l["sum_vars"] = la.sum_vars;
    l["free_vars"] = la.free_vars;
    l["variables"] = la.hypergraph.names;
    l["k"] = la.k;
    l["method"] = la.decomposition.method;
    l["treewidth"] = st.treewidth;
    l["hyperwidth"] = st.hyperwidth;
    l["hyperwidth_without_child"] = optional_number(st.hyperwidth_without_child);
    l["clusters"] = st.n_clusters;
    l["max_degree"] = st.max_degree;
    l["decomposition"] = format_decomposition(la.decomposition, la.hypergraph);
    l["log10_table_tw"] = b.log10_table_tw;
    l["log10_time_tw"] = b.log10_time_tw;
    l["log10_table_hw"] = optional_number(b.log10_table_hw);
    l["log10_time_hw"] = optional_number(b.log10_time_hw);
    j["levels"].push_back(std::move(l));
  }
  j["exponent_sum"] = report.bounds.exponent_sum;
  j["exponent_max"] = report.bounds.exponent_max;
  j["log10_time_tw"] = report.bounds.log10_time_tw;
  j["log10_time_hw"] = optional_number(report.bounds.log10_time_hw);
  j["hw_tighter"] = report.bounds.hw_tighter ? ordered_json(*report.bounds.hw_tighter) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string analysis_csv(const AnalysisReport& report) {
  std::ostringstream os;
  os << "level,parent,factors,vars,treewidth,hyperwidth,log10_table_tw,log10_time_tw\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& la = report.levels[i];
    const auto& b = report.bounds.levels[i];
    os << la.level << "," << (la.parent ? std::to_string(*la.parent) : "") << "," << la.factors.size() << ","
       << la.hypergraph.num_nodes() << "," << la.decomposition.stats.treewidth << ","
       << la.decomposition.stats.hyperwidth << "," << fixed(b.log10_table_tw, 3) << "," << fixed(b.log10_time_tw, 3)
       << "\n";
  }
  return os.str();
}

std::string factor_table(const SparseFactor& f, const VarSpace& space) {
  std::ostringstream os;
  for (std::size_t r = 0; r < f.size(); ++r) {
    const auto key = f.key(r);
    for (std::size_t c = 0; c < f.width(); ++c) os << space.name(f.scope()[c].id) << "=" << key[c] << " ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", f.value(r));
    os << " " << buf << "\n";
  }
  return os.str();
}

}  // namespace pihte
