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

#include "pihte/estimand.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "pihte/errors.hpp"

namespace pihte {
namespace {

void sort_natural(std::vector<std::string>& names) {
  std::sort(names.begin(), names.end(),
            [](const std::string& a, const std::string& b) { return natural_less(a, b); });
}

std::vector<std::string> sorted_natural(const std::set<std::string>& names) {
  std::vector<std::string> out(names.begin(), names.end());
  sort_natural(out);
  return out;
}

std::string join(const std::vector<std::string>& names, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += sep;
    out += names[i];
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Estimand parse_all() {
    Estimand out;
    skip_ws();
    if (looks_like_query_header()) out.query = parse_query_header();
    out.expr = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    out.warnings = std::move(warnings_);
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool at(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!at(c)) {
      fail(std::string("expected '") + c + "'" +
           (pos_ < s_.size() ? std::string(", found '") + s_[pos_] + "'" : ", found end of input"));
    }
    ++pos_;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  // Identifier at the cursor without consuming it ("" if none).
  std::string_view peek_ident() {
    skip_ws();
    std::size_t e = pos_;
    if (e < s_.size() && ident_start(s_[e])) {
      while (e < s_.size() && ident_char(s_[e])) ++e;
    }
    return s_.substr(pos_, e - pos_);
  }

  char char_after_ident() {
    const auto id = peek_ident();
    std::size_t e = pos_ + id.size();
    while (e < s_.size() && std::isspace(static_cast<unsigned char>(s_[e]))) ++e;
    return e < s_.size() ? s_[e] : '\0';
  }

  std::string ident() {
    const auto id = peek_ident();
    if (id.empty()) fail("expected identifier");
    pos_ += id.size();
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      fail("apostrophes are reserved for renamed variables");
    }
    return std::string(id);
  }

  std::vector<std::string> varlist() {
    std::vector<std::string> out{ident()};
    while (at(',')) {
      ++pos_;
      out.push_back(ident());
    }
    return out;
  }

  bool looks_like_query_header() {
    const std::size_t save = pos_;
    bool header = false;
    if (peek_ident() == "P" && char_after_ident() == '(') {
      pos_ += 1;
      expect('(');
      // Scan to the matching ')' and look for '='.
      int depth = 1;
      while (pos_ < s_.size() && depth > 0) {
        if (s_[pos_] == '(') ++depth;
        if (s_[pos_] == ')') --depth;
        ++pos_;
      }
      header = depth == 0 && at('=');
    }
    pos_ = save;
    return header;
  }

  Query parse_query_header() {
    Query q;
    pos_ += peek_ident().size();  // "P"
    expect('(');
    q.outcome = varlist();
    expect('|');
    if (peek_ident() != "do") fail("expected 'do(' in query header");
    pos_ += 2;
    expect('(');
    q.do_vars = varlist();
    expect(')');
    expect(')');
    expect('=');
    return q;
  }

  ExprPtr parse_expr() {
    ExprPtr num = parse_product();
    if (at('/')) {
      ++pos_;
      if (!at_factor_start()) fail("expected a probability term, sum or '(' after '/'");
      ExprPtr den = parse_factor();
      return Expr::make_ratio(std::move(num), std::move(den));
    }
    return num;
  }

  bool at_factor_start() {
    skip_ws();
    if (at('(')) return true;
    const auto id = peek_ident();
    return (id == "P" && char_after_ident() == '(') || (id == "sum" && char_after_ident() == '[');
  }

  ExprPtr parse_product() {
    std::vector<ExprPtr> factors;
    if (!at_factor_start()) fail("expected a probability term, sum or '('");
    while (at_factor_start()) factors.push_back(parse_factor());
    if (factors.size() == 1) return factors.front();
    return Expr::make_product(std::move(factors));
  }

  ExprPtr parse_factor() {
    if (at('(')) {
      ++pos_;
      ExprPtr inner = parse_expr();
      expect(')');
      return inner;
    }
    const auto id = peek_ident();
    if (id == "sum") return parse_sum();
    return parse_prob();
  }

  ExprPtr parse_sum() {
    pos_ += 3;
    expect('[');
    const std::size_t list_pos = pos_;
    auto bound = varlist();
    expect(']');
    for (std::size_t i = 0; i < bound.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (bound[i] == bound[j]) {
          throw DuplicateBoundVar("'" + bound[i] + "' bound twice in sum at position " +
                                  std::to_string(list_pos));
        }
      }
    }
    expect('(');
    ExprPtr body = parse_expr();
    expect(')');
    const auto body_free = free_vars(*body);
    std::vector<std::string> kept;
    for (auto& b : bound) {
      if (body_free.count(b)) {
        kept.push_back(b);
      } else {
        warnings_.push_back("sum over '" + b + "' at position " + std::to_string(list_pos) +
                            " does not bind any variable of its body; dropped");
      }
    }
    if (kept.empty()) return body;
    return Expr::make_sum(std::move(kept), std::move(body));
  }

  ExprPtr parse_prob() {
    const std::size_t start = pos_;
    if (peek_ident() != "P") fail("expected 'P('");
    pos_ += 1;
    expect('(');
    ProbTerm term;
    term.left = varlist();
    if (at('|')) {
      ++pos_;
      term.right = varlist();
    }
    expect(')');
    std::set<std::string> seen;
    for (const auto* side : {&term.left, &term.right}) {
      for (const auto& v : *side) {
        if (!seen.insert(v).second) {
          throw SyntaxError(start, "variable '" + v + "' appears twice in a probability term");
        }
      }
    }
    return Expr::make_prob(std::move(term));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<std::string> warnings_;
};

class Flattener {
 public:
  Hierarchy run(const ExprPtr& expr) {
    hier_.source = expr;
    for (const auto& v : free_vars(*expr)) taken_.insert(v);
    hier_.levels.emplace_back();
    hier_.root = 0;
    hier_.levels[0].free_vars = sorted_natural(free_vars(*expr));
    std::vector<std::size_t> ratio_stack;
    into(*expr, {}, 0, ratio_stack);
    for (auto& level : hier_.levels) sort_natural(level.sum_vars);
    return std::move(hier_);
  }

 private:
  using Env = std::map<std::string, std::string>;

  static std::string mapped(const Env& env, const std::string& name) {
    auto it = env.find(name);
    return it == env.end() ? name : it->second;
  }

  static std::vector<std::string> mapped(const Env& env, const std::set<std::string>& names) {
    std::vector<std::string> out;
    for (const auto& n : names) out.push_back(mapped(env, n));
    sort_natural(out);
    return out;
  }

  std::string fresh(const std::string& name) {
    std::string candidate = name + "'";
    while (taken_.count(candidate)) candidate += "'";
    return candidate;
  }

  void into(const Expr& e, const Env& env, std::size_t level,
            std::vector<std::size_t>& ratio_stack) {
    switch (e.kind) {
      case Expr::Kind::kProb: {
        LevelFactor f;
        f.kind = LevelFactor::Kind::kProb;
        for (const auto& v : e.prob.left) f.term.left.push_back(mapped(env, v));
        for (const auto& v : e.prob.right) f.term.right.push_back(mapped(env, v));
        f.scope = f.term.left;
        f.scope.insert(f.scope.end(), f.term.right.begin(), f.term.right.end());
        sort_natural(f.scope);
        f.ratios = ratio_stack;
        hier_.levels[level].factors.push_back(std::move(f));
        break;
      }
      case Expr::Kind::kProduct:
        for (const auto& c : e.children) into(*c, env, level, ratio_stack);
        break;
      case Expr::Kind::kSum: {
        Env inner = env;
        for (const auto& b : e.bound) {
          std::string name = b;
          if (taken_.count(b)) {
            name = fresh(b);
            hier_.levels[level].rename_map[name] = b;
          }
          taken_.insert(name);
          inner[b] = name;
          hier_.levels[level].sum_vars.push_back(name);
        }
        into(*e.children[0], inner, level, ratio_stack);
        break;
      }
      case Expr::Kind::kRatio: {
        const std::size_t child = hier_.levels.size();
        hier_.levels.emplace_back();
        hier_.levels[child].id = child;
        hier_.levels[child].parent = level;
        hier_.levels[level].children.push_back(child);

        ratio_stack.push_back(child);
        into(*e.children[0], env, level, ratio_stack);
        ratio_stack.pop_back();

        const auto& parent_factors = hier_.levels[level].factors;
        std::vector<std::size_t> numerator;
        for (std::size_t i = 0; i < parent_factors.size(); ++i) {
          const auto& r = parent_factors[i].ratios;
          if (std::find(r.begin(), r.end(), child) != r.end()) numerator.push_back(i);
        }
        hier_.levels[child].numerator_factors = std::move(numerator);
        hier_.levels[child].numerator_free_vars = mapped(env, free_vars(*e.children[0]));
        hier_.levels[child].free_vars = mapped(env, free_vars(*e.children[1]));

        std::vector<std::size_t> child_stack;
        into(*e.children[1], env, child, child_stack);

        LevelFactor out;
        out.kind = LevelFactor::Kind::kChildOutput;
        out.child = child;
        out.scope = hier_.levels[child].free_vars;
        out.ratios = ratio_stack;
        hier_.levels[level].factors.push_back(std::move(out));
        break;
      }
    }
  }

  Hierarchy hier_;
  std::set<std::string> taken_;
};

struct ProbPlan {
  const SparseFactor* factor = nullptr;
  std::vector<std::size_t> slot_for_col;
};

// Literal evaluator over name slots. Inner sums that rebind a name shadow
// the outer value and restore it afterwards.
class DenseEvaluator {
 public:
  DenseEvaluator(const Expr& root, const Bindings& bindings, const VarSpace& space)
      : bindings_(bindings), space_(space) {
    compile(root);
  }

  std::size_t slot(const std::string& name) {
    auto it = slot_of_.find(name);
    if (it != slot_of_.end()) return it->second;
    const std::size_t s = cards_.size();
    slot_of_.emplace(name, s);
    names_.push_back(name);
    cards_.push_back(space_.card(space_.id(base_name(name))));
    values_.push_back(kUnassigned);
    return s;
  }

  std::uint32_t card_of_slot(std::size_t s) const { return cards_[s]; }
  void set(std::size_t s, State v) { values_[s] = v; }

  double enumeration_cost(const Expr& e) const {
    double cost = 1.0;
    if (e.kind == Expr::Kind::kSum) {
      for (const auto& b : e.bound) cost *= cards_[slot_of_.at(b)];
    }
    for (const auto& c : e.children) cost *= enumeration_cost(*c);
    return cost;
  }

  double eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kProb: {
        const ProbPlan& plan = plans_.at(&e);
        key_.resize(plan.slot_for_col.size());
        for (std::size_t c = 0; c < key_.size(); ++c) key_[c] = values_[plan.slot_for_col[c]];
        return plan.factor->lookup(key_);
      }
      case Expr::Kind::kProduct: {
        double p = 1.0;
        for (const auto& c : e.children) p *= eval(*c);
        return p;
      }
      case Expr::Kind::kSum: {
        std::vector<std::size_t> slots;
        std::vector<State> saved;
        for (const auto& b : e.bound) {
          slots.push_back(slot_of_.at(b));
          saved.push_back(values_[slots.back()]);
          values_[slots.back()] = 0;
        }
        double total = 0.0;
        while (true) {
          total += eval(*e.children[0]);
          std::size_t i = 0;
          while (i < slots.size() && ++values_[slots[i]] == cards_[slots[i]]) {
            values_[slots[i]] = 0;
            ++i;
          }
          if (i == slots.size()) break;
        }
        for (std::size_t i = 0; i < slots.size(); ++i) values_[slots[i]] = saved[i];
        return total;
      }
      case Expr::Kind::kRatio: {
        const double n = eval(*e.children[0]);
        const double d = eval(*e.children[1]);
        if (d == 0.0) {
          if (n == 0.0) return 0.0;
          throw DivisionByZero("denominator " + to_string(*e.children[1]) + " is 0 at " +
                               describe_assignment());
        }
        return n / d;
      }
    }
    return 0.0;
  }

 private:
  std::string describe_assignment() const {
    std::string out = "{";
    for (std::size_t s = 0; s < names_.size(); ++s) {
      if (values_[s] == kUnassigned) continue;
      if (out.size() > 1) out += ", ";
      out += names_[s] + "=" + std::to_string(values_[s]);
    }
    return out + "}";
  }

  void compile(const Expr& e) {
    if (e.kind == Expr::Kind::kSum) {
      for (const auto& b : e.bound) slot(b);
    }
    if (e.kind == Expr::Kind::kProb) {
      ProbPlan plan;
      const std::string key = term_key(e.prob);
      auto it = bindings_.find(key);
      if (it == bindings_.end()) throw UnboundFactor("no factor bound for " + key);
      plan.factor = &it->second;
      std::vector<std::string> names = e.prob.left;
      names.insert(names.end(), e.prob.right.begin(), e.prob.right.end());
      for (const ScopeVar& v : plan.factor->scope()) {
        auto match = std::find_if(names.begin(), names.end(), [&](const std::string& n) {
          return space_.id(base_name(n)) == v.id;
        });
        if (match == names.end()) {
          throw ScopeConflict("factor bound to " + key + " has a variable outside the term");
        }
        plan.slot_for_col.push_back(slot(*match));
      }
      for (const auto& n : names) slot(n);
      plans_.emplace(&e, std::move(plan));
    }
    for (const auto& c : e.children) compile(*c);
  }

  const Bindings& bindings_;
  const VarSpace& space_;
  std::unordered_map<std::string, std::size_t> slot_of_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> cards_;
  std::vector<State> values_;
  std::unordered_map<const Expr*, ProbPlan> plans_;
  std::vector<State> key_;
};

void collect_terms(const Expr& e, std::vector<const ProbTerm*>& out) {
  if (e.kind == Expr::Kind::kProb) out.push_back(&e.prob);
  for (const auto& c : e.children) collect_terms(*c, out);
}

}  // namespace

ExprPtr Expr::make_prob(ProbTerm term) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::kProb;
  e->prob = std::move(term);
  return e;
}

ExprPtr Expr::make_product(std::vector<ExprPtr> factors) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::kProduct;
  e->children = std::move(factors);
  return e;
}

ExprPtr Expr::make_sum(std::vector<std::string> bound, ExprPtr body) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::kSum;
  e->bound = std::move(bound);
  e->children.push_back(std::move(body));
  return e;
}

ExprPtr Expr::make_ratio(ExprPtr numerator, ExprPtr denominator) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::kRatio;
  e->children.push_back(std::move(numerator));
  e->children.push_back(std::move(denominator));
  return e;
}

Estimand parse_estimand(std::string_view text) { return Parser(text).parse_all(); }

ExprPtr parse(std::string_view text) { return parse_estimand(text).expr; }

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  switch (e.kind) {
    case Expr::Kind::kProb:
      out.insert(e.prob.left.begin(), e.prob.left.end());
      out.insert(e.prob.right.begin(), e.prob.right.end());
      break;
    case Expr::Kind::kSum:
      out = free_vars(*e.children[0]);
      for (const auto& b : e.bound) out.erase(b);
      break;
    default:
      for (const auto& c : e.children) {
        auto sub = free_vars(*c);
        out.insert(sub.begin(), sub.end());
      }
  }
  return out;
}

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kProb:
      return "P(" + join(e.prob.left) + (e.prob.right.empty() ? "" : "|" + join(e.prob.right)) + ")";
    case Expr::Kind::kProduct: {
      std::string out;
      for (const auto& c : e.children) {
        if (!out.empty()) out += ' ';
        out += c->kind == Expr::Kind::kRatio ? "(" + to_string(*c) + ")" : to_string(*c);
      }
      return out;
    }
    case Expr::Kind::kSum:
      return "sum[" + join(e.bound) + "](" + to_string(*e.children[0]) + ")";
    case Expr::Kind::kRatio: {
      const auto& num = *e.children[0];
      std::string n = to_string(num);
      if (num.kind == Expr::Kind::kRatio) n = "(" + n + ")";
      return n + " / (" + to_string(*e.children[1]) + ")";
    }
  }
  return {};
}

std::string base_name(std::string_view name) {
  while (!name.empty() && name.back() == '\'') name.remove_suffix(1);
  return std::string(name);
}

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto na = a.substr(i, ie - i);
      auto nb = b.substr(j, je - j);
      while (na.size() > 1 && na[0] == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb[0] == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

std::string term_key(const ProbTerm& term) {
  std::vector<std::string> l;
  std::vector<std::string> r;
  for (const auto& v : term.left) l.push_back(base_name(v));
  for (const auto& v : term.right) r.push_back(base_name(v));
  sort_natural(l);
  sort_natural(r);
  return "P(" + join(l) + (r.empty() ? "" : "|" + join(r)) + ")";
}

std::vector<std::size_t> Hierarchy::bottom_up_order() const {
  std::vector<std::size_t> order;
  std::function<void(std::size_t)> visit = [&](std::size_t id) {
    for (std::size_t c : levels[id].children) visit(c);
    order.push_back(id);
  };
  visit(root);
  return order;
}

std::size_t Hierarchy::depth() const {
  std::function<std::size_t(std::size_t)> d = [&](std::size_t id) -> std::size_t {
    std::size_t best = 0;
    for (std::size_t c : levels[id].children) best = std::max(best, d(c));
    return best + 1;
  };
  return d(root);
}

Hierarchy flatten(const ExprPtr& expr) { return Flattener().run(expr); }

ExprPtr to_expr(const Hierarchy& hier, std::size_t level) {
  const FlatLevel& lv = hier.levels.at(level);
  std::vector<ExprPtr> terms;
  std::vector<ExprPtr> dens;
  for (const auto& f : lv.factors) {
    if (f.kind == LevelFactor::Kind::kProb) {
      terms.push_back(Expr::make_prob(f.term));
    } else {
      dens.push_back(to_expr(hier, f.child));
    }
  }
  if (terms.empty()) throw std::logic_error("level without probability terms");
  ExprPtr body = terms.size() == 1 ? terms[0] : Expr::make_product(std::move(terms));
  if (!dens.empty()) {
    ExprPtr den = dens.size() == 1 ? dens[0] : Expr::make_product(std::move(dens));
    body = Expr::make_ratio(std::move(body), std::move(den));
  }
  if (lv.sum_vars.empty()) return body;
  return Expr::make_sum(lv.sum_vars, std::move(body));
}

Bindings bind_empirical(const Expr& e, const Dataset& data, const VarSpace& space) {
  std::vector<const ProbTerm*> terms;
  collect_terms(e, terms);
  Bindings out;
  for (const ProbTerm* t : terms) {
    const std::string key = term_key(*t);
    if (out.count(key)) continue;
    std::vector<std::string> l;
    std::vector<std::string> r;
    for (const auto& v : t->left) l.push_back(base_name(v));
    for (const auto& v : t->right) r.push_back(base_name(v));
    out.emplace(key, empirical_prob(data, space, l, r));
  }
  return out;
}

double dense_expr_eval(const Expr& e, const Bindings& bindings, const VarSpace& space,
                       const std::map<std::string, State>& free_assignment,
                       double dense_limit) {
  DenseEvaluator ev(e, bindings, space);
  if (ev.enumeration_cost(e) > dense_limit) {
    throw DenseLimitExceeded("enumeration exceeds dense limit " + std::to_string(dense_limit));
  }
  for (const auto& v : free_vars(e)) {
    auto it = free_assignment.find(v);
    if (it == free_assignment.end()) throw IncompleteAssignment("free variable '" + v + "' unassigned");
    const std::size_t s = ev.slot(v);
    if (it->second >= ev.card_of_slot(s)) throw std::out_of_range("state out of domain for '" + v + "'");
    ev.set(s, it->second);
  }
  return ev.eval(e);
}

SparseFactor dense_expr_table(const Expr& e, const Bindings& bindings, const VarSpace& space,
                              double dense_limit, const std::map<std::string, State>& fixed) {
  DenseEvaluator ev(e, bindings, space);
  auto free = sorted_natural(free_vars(e));
  std::vector<std::size_t> slots;
  std::vector<ScopeVar> scope;
  std::vector<State> first;
  std::vector<State> stop;
  double cells = 1.0;
  for (const auto& v : free) {
    slots.push_back(ev.slot(v));
    scope.push_back(space.scope_var(space.id(v)));
    auto pin = fixed.find(v);
    if (pin != fixed.end() && pin->second >= ev.card_of_slot(slots.back())) {
      throw std::out_of_range("state out of domain for '" + v + "'");
    }
    first.push_back(pin == fixed.end() ? 0 : pin->second);
    stop.push_back(pin == fixed.end() ? ev.card_of_slot(slots.back()) : pin->second + 1);
    cells *= stop.back() - first.back();
  }
  if (cells * ev.enumeration_cost(e) > dense_limit) {
    throw DenseLimitExceeded("dense evaluation needs " + std::to_string(cells * ev.enumeration_cost(e)) +
                             " cells, limit " + std::to_string(dense_limit));
  }
  std::vector<State> key = first;
  std::vector<State> keys;
  std::vector<double> values;
  while (true) {
    for (std::size_t i = 0; i < slots.size(); ++i) ev.set(slots[i], key[i]);
    const double v = ev.eval(e);
    if (v != 0.0) {
      keys.insert(keys.end(), key.begin(), key.end());
      values.push_back(v);
    }
    std::size_t i = 0;
    while (i < key.size() && ++key[i] == stop[i]) {
      key[i] = first[i];
      ++i;
    }
    if (i == key.size()) break;
  }
  return SparseFactor::from_rows(std::move(scope), keys, values);
}

}  // namespace pihte
