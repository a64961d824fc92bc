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

#include "pihte/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pihte/cte.hpp"
#include "pihte/errors.hpp"
#include "pihte/estimand.hpp"
#include "pihte/model.hpp"
#include "pihte/report.hpp"
#include "pihte/scm.hpp"

namespace pihte {
namespace {

struct Config {
  std::string graph;
  std::string data;
  std::string estimand;
  std::string estimand_file;
  std::vector<std::string> decompositions;
  std::string do_text;
  std::string outcome_text;
  std::string target_text;
  std::string sizes_text;
  std::string format;
  std::string out;
  std::string cbn;
  std::string cbn_out;
  std::string dist = "dirichlet";
  std::uint64_t seed = 0;
  double dense_limit = kDefaultDenseLimit;
  unsigned restarts = 1;
  double alpha = 1.0;
  double mixture_weight = 0.5;
  std::size_t rows = 1000;
  double tolerance = 1e-9;
  std::size_t random_count = 0;
  std::optional<std::size_t> max_entries;
  std::optional<double> tightness;
  bool no_timing = false;
  bool no_renormalize = false;
  bool greedy = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

Estimand load_estimand(const Config& cfg) {
  if (cfg.estimand.empty() == cfg.estimand_file.empty()) {
    throw ValidationError("give exactly one of --estimand and --estimand-file");
  }
  return parse_estimand(cfg.estimand.empty() ? read_file(cfg.estimand_file) : cfg.estimand);
}

CausalGraph require_graph(const Config& cfg) {
  if (cfg.graph.empty()) throw ValidationError("--graph is required");
  return load_graph(cfg.graph);
}

// "--decomposition PATH" applies to the root level; "ID:PATH" to level ID.
std::map<std::size_t, std::string> load_decompositions(const Config& cfg) {
  std::map<std::size_t, std::string> out;
  for (const auto& entry : cfg.decompositions) {
    std::size_t level = 0;
    std::string path = entry;
    const auto colon = entry.find(':');
    if (colon != std::string::npos && colon > 0 &&
        entry.find_first_not_of("0123456789") == colon) {
      level = std::stoul(entry.substr(0, colon));
      path = entry.substr(colon + 1);
    }
    out[level] = read_file(path);
  }
  return out;
}

std::size_t entry_cap(const Config& cfg) {
  if (cfg.max_entries) return *cfg.max_entries;
  return max_entries_from_env().value_or(kNoEntryLimit);
}

void emit(const Config& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw ValidationError("cannot write '" + cfg.out + "'");
  file << text;
}

std::function<std::uint32_t(const std::string&)> graph_cards(const CausalGraph& graph) {
  return [&graph](const std::string& name) {
    auto idx = graph.index_of(base_name(name));
    if (!idx) throw UnknownVariable("'" + base_name(name) + "' is not a graph variable");
    return graph.variables[*idx].domain_size;
  };
}

EvalOptions eval_options(const Config& cfg, const Estimand& est) {
  EvalOptions o;
  o.do_assignment = parse_assignment(cfg.do_text);
  o.outcome = split_list(cfg.outcome_text);
  o.query = est.query;
  o.renormalize = !cfg.no_renormalize;
  o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  o.decomposition_text = load_decompositions(cfg);
  o.max_entries = entry_cap(cfg);
  o.greedy = cfg.greedy;
  return o;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

int cmd_analyze(const Config& cfg, std::ostream& out, std::ostream& err) {
  const Estimand est = load_estimand(cfg);
  const CausalGraph graph = require_graph(cfg);
  print_warnings(est.warnings, err);
  const Hierarchy hier = flatten(est.expr);
  AnalyzeOptions opts;
  opts.restarts = cfg.restarts;
  opts.seed = cfg.seed;
  opts.decomposition_text = load_decompositions(cfg);
  opts.t = cfg.tightness;
  if (!opts.t && !cfg.data.empty()) opts.t = static_cast<double>(load_dataset(cfg.data, graph).n_rows);
  const AnalysisReport report = analyze_hierarchy(hier, graph_cards(graph), opts);
  const std::string format = cfg.format.empty() ? "text" : cfg.format;
  if (format == "json") {
    emit(cfg, out, analysis_json(report));
  } else if (format == "csv") {
    emit(cfg, out, analysis_csv(report));
  } else {
    emit(cfg, out, analysis_text(report));
  }
  return kExitOk;
}

int cmd_estimate(const Config& cfg, std::ostream& out, std::ostream& err) {
  const Estimand est = load_estimand(cfg);
  const CausalGraph graph = require_graph(cfg);
  if (cfg.data.empty()) throw ValidationError("--data is required");
  const Dataset data = load_dataset(cfg.data, graph);
  print_warnings(est.warnings, err);
  const Hierarchy hier = flatten(est.expr);
  const EvalOptions opts = eval_options(cfg, est);
  const EvalReport report = pi_hte(hier, data, opts);
  if (cfg.format == "csv") {
    emit(cfg, out, metrics_csv_header() + "\n" + metrics_csv_row(run_metrics(report)) + "\n");
  } else {
    emit(cfg, out, report_json(report, opts.do_assignment, !cfg.no_timing));
  }
  return kExitOk;
}

struct OracleOutcome {
  bool agree = false;
  FactorDiff diff;
  std::string note;
};

bool numeric_error(const Error& e) { return e.error_class() == ErrorClass::kNumeric; }

// Runs both evaluators; two numeric rejections count as agreement.
OracleOutcome oracle_once(const Hierarchy& hier, const Dataset& data, const EvalOptions& opts, double dense_limit,
                          double tolerance) {
  OracleOutcome o;
  std::optional<SparseFactor> fast;
  std::optional<SparseFactor> slow;
  std::string fast_error;
  std::string slow_error;
  try {
    EvalOptions raw = opts;
    raw.renormalize = false;
    fast = pi_hte(hier, data, raw).raw;
  } catch (const Error& e) {
    if (!numeric_error(e)) throw;
    fast_error = e.what();
  }
  try {
    slow = brute_force_eval(hier, data, opts.do_assignment, dense_limit);
  } catch (const Error& e) {
    if (!numeric_error(e)) throw;
    slow_error = e.what();
  }
  if (!fast && !slow) {
    o.agree = true;
    o.note = "both reject: " + fast_error;
    return o;
  }
  if (!fast || !slow) {
    o.note = fast ? "only the oracle rejects: " + slow_error : "only pi_hte rejects: " + fast_error;
    return o;
  }
  o.diff = compare_factors(*fast, *slow);
  o.agree = o.diff.same_scope && o.diff.max_rel <= tolerance;
  return o;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int cmd_oracle(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::size_t instances = 0;
  std::size_t agreed = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::ostringstream lines;
  auto account = [&](const OracleOutcome& o, const std::string& label) {
    ++instances;
    if (o.agree) ++agreed;
    max_abs = std::max(max_abs, o.diff.max_abs);
    max_rel = std::max(max_rel, o.diff.max_rel);
    if (!o.agree || !o.note.empty()) {
      lines << label << ": " << (o.agree ? "agree" : "MISMATCH");
      if (!o.note.empty()) lines << " (" << o.note << ")";
      if (o.note.empty()) lines << " max_abs=" << sci(o.diff.max_abs) << " max_rel=" << sci(o.diff.max_rel);
      lines << "\n";
    }
  };

  if (cfg.random_count > 0) {
    for (std::size_t i = 0; i < cfg.random_count; ++i) {
      const RandomInstance inst = random_instance(cfg.seed + i);
      const Estimand est = parse_estimand(inst.estimand);
      const Hierarchy hier = flatten(est.expr);
      EvalOptions opts;
      opts.max_entries = entry_cap(cfg);
      account(oracle_once(hier, inst.data, opts, cfg.dense_limit, cfg.tolerance),
              "instance " + std::to_string(cfg.seed + i) + " " + inst.estimand);
    }
  } else {
    const Estimand est = load_estimand(cfg);
    const CausalGraph graph = require_graph(cfg);
    if (cfg.data.empty()) throw ValidationError("--data is required");
    const Dataset data = load_dataset(cfg.data, graph);
    print_warnings(est.warnings, err);
    const Hierarchy hier = flatten(est.expr);
    account(oracle_once(hier, data, eval_options(cfg, est), cfg.dense_limit, cfg.tolerance), "estimand");
  }
  std::ostringstream os;
  os << lines.str();
  os << "instances " << instances << ", agreed " << agreed << ", max_abs " << sci(max_abs) << ", max_rel "
     << sci(max_rel) << ", tolerance " << sci(cfg.tolerance) << "\n";
  const bool pass = agreed == instances;
  os << (pass ? "PASS" : "FAIL") << "\n";
  emit(cfg, out, os.str());
  return pass ? kExitOk : kExitMismatch;
}

CBN obtain_cbn(const Config& cfg) {
  if (!cfg.cbn.empty()) return load_cbn(cfg.cbn);
  CbnOptions opts;
  opts.distribution = parse_distribution(cfg.dist);
  opts.alpha = cfg.alpha;
  opts.mixture_weight = cfg.mixture_weight;
  return random_cbn(require_graph(cfg), opts, cfg.seed);
}

void write_cbn(const Config& cfg, const CBN& cbn) {
  if (cfg.cbn_out.empty()) return;
  std::ofstream file(cfg.cbn_out);
  if (!file) throw ValidationError("cannot write '" + cfg.cbn_out + "'");
  file << cbn_to_json(cbn);
}

int cmd_simulate(const Config& cfg, std::ostream& out, std::ostream&) {
  const CBN cbn = obtain_cbn(cfg);
  write_cbn(cfg, cbn);
  if (!cfg.target_text.empty()) {
    const auto truth =
        interventional_truth(cbn, parse_assignment(cfg.do_text), split_list(cfg.target_text), cfg.dense_limit);
    const VarSpace space = cbn.observed_space();
    emit(cfg, out, cfg.format == "json" ? factor_json(truth, space) + "\n" : factor_table(truth, space));
    return kExitOk;
  }
  if (cfg.rows == 0) throw ValidationError("--rows must be at least 1");
  emit(cfg, out, format_dataset(sample_dataset(cbn, cfg.rows, cfg.seed + 1)));
  return kExitOk;
}

int cmd_bench(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::size_t> sizes;
  for (const auto& s : split_list(cfg.sizes_text)) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v == 0) throw ParseError("bad sample size '" + s + "'");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw ValidationError("--sizes needs at least one sample size");
  const Estimand est = load_estimand(cfg);
  print_warnings(est.warnings, err);
  const CBN cbn = obtain_cbn(cfg);
  write_cbn(cfg, cbn);
  const Hierarchy hier = flatten(est.expr);
  const EvalOptions opts = eval_options(cfg, est);

  std::vector<MetricsRow> rows;
  for (std::size_t n : sizes) {
    const Dataset data = sample_dataset(cbn, n, cfg.seed + 1);
    rows.push_back(run_metrics(pi_hte(hier, data, opts)));
  }
  if (cfg.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["samples"] = r.samples;
      if (!cfg.no_timing) row["time"] = r.time;
      row["max_table_size"] = r.max_table_size;
      row["t"] = r.t;
      row["density"] = r.density;
      j.push_back(row);
    }
    emit(cfg, out, j.dump(2) + "\n");
  } else {
    std::string text = metrics_csv_header() + "\n";
    for (const auto& r : rows) text += metrics_csv_row(r) + "\n";
    emit(cfg, out, text);
  }
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::kInput: return kExitInput;
    case ErrorClass::kNumeric: return kExitNumeric;
    case ErrorClass::kResource: return kExitResource;
    case ErrorClass::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

std::map<std::string, State> parse_assignment(std::string_view text) {
  std::map<std::string, State> out;
  for (const auto& item : split_list(std::string(text))) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw ParseError("expected VAR=value, got '" + item + "'");
    }
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (value.find_first_not_of("0123456789") != std::string::npos || value.size() > 9) {
      throw ParseError("bad value in '" + item + "'");
    }
    if (!out.emplace(name, static_cast<State>(std::stoul(value))).second) {
      throw ParseError("'" + name + "' assigned twice");
    }
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plug-in evaluation of causal estimands over hypertree decompositions", "pihte"};
  app.require_subcommand(1);
  Config cfg;

  auto common_inputs = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph, "Causal graph file");
    sub->add_option("--estimand", cfg.estimand, "Estimand text");
    sub->add_option("--estimand-file", cfg.estimand_file, "File holding the estimand");
    sub->add_option("--decomposition", cfg.decompositions, "Decomposition file, optionally LEVEL:PATH");
    sub->add_option("--seed", cfg.seed, "Seed for every random choice");
    sub->add_option("--restarts", cfg.restarts, "Min-fill restarts")->check(CLI::PositiveNumber);
    sub->add_option("--format", cfg.format, "Output format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--out", cfg.out, "Write the output here instead of stdout");
  };
  auto eval_inputs = [&](CLI::App* sub) {
    sub->add_option("--data", cfg.data, "Dataset CSV");
    sub->add_option("--do", cfg.do_text, "Interventions VAR=val[,..]");
    sub->add_option("--outcome", cfg.outcome_text, "Outcome variables for renormalization");
    sub->add_flag("--no-renormalize", cfg.no_renormalize, "Report the raw table as the result");
    sub->add_option("--max-entries", cfg.max_entries, "Cap on materialized table entries");
    sub->add_flag("--no-timing", cfg.no_timing, "Leave timing fields out of JSON");
    sub->add_flag("--greedy", cfg.greedy,
                  "Reorder cluster products and sum variables out early");
  };
  auto model_inputs = [&](CLI::App* sub) {
    sub->add_option("--cbn", cfg.cbn, "CBN JSON file instead of a random one");
    sub->add_option("--cbn-out", cfg.cbn_out, "Write the CBN used as JSON");
    sub->add_option("--dist", cfg.dist, "uniform|dirichlet|deterministic|mixture");
    sub->add_option("--alpha", cfg.alpha, "Dirichlet concentration");
    sub->add_option("--mixture-weight", cfg.mixture_weight, "Chance a mixture CPT is deterministic");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Widths, decompositions and bounds per level");
  common_inputs(analyze);
  analyze->add_option("--data", cfg.data, "Dataset whose size bounds the tightness");
  analyze->add_option("--tightness", cfg.tightness, "Tightness t for the hyperwidth bounds");

  CLI::App* estimate = app.add_subcommand("estimate", "Evaluate an estimand on a dataset");
  common_inputs(estimate);
  eval_inputs(estimate);

  CLI::App* oracle = app.add_subcommand("oracle", "Compare against dense brute-force evaluation");
  common_inputs(oracle);
  eval_inputs(oracle);
  oracle->add_option("--dense-limit", cfg.dense_limit, "Largest dense enumeration allowed");
  oracle->add_option("--tolerance", cfg.tolerance, "Largest relative difference accepted");
  oracle->add_option("--random", cfg.random_count, "Check this many seeded random instances instead");

  CLI::App* simulate = app.add_subcommand("simulate", "Sample data or exact interventional tables from a CBN");
  common_inputs(simulate);
  model_inputs(simulate);
  simulate->add_option("--rows", cfg.rows, "Rows to sample");
  simulate->add_option("--target", cfg.target_text, "Print P(target | do(..)) instead of sampling");
  simulate->add_option("--do", cfg.do_text, "Interventions VAR=val[,..] for --target");
  simulate->add_option("--dense-limit", cfg.dense_limit, "Largest enumeration allowed for --target");

  CLI::App* bench = app.add_subcommand("bench", "Table of run metrics across sample sizes");
  common_inputs(bench);
  model_inputs(bench);
  eval_inputs(bench);
  bench->add_option("--sizes", cfg.sizes_text, "Sample sizes a,b,c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*analyze) return cmd_analyze(cfg, out, err);
    if (*estimate) return cmd_estimate(cfg, out, err);
    if (*oracle) return cmd_oracle(cfg, out, err);
    if (*simulate) return cmd_simulate(cfg, out, err);
    if (*bench) return cmd_bench(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace pihte
