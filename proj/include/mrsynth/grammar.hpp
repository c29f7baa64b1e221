// Copyright 2026 The mrsynth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mrsynth/error.hpp"

namespace mrsynth {

using RuleId = int;

enum class SymbolKind { kTerminal, kNonterminal };

// A grammar symbol by name. Terminals are MR surface tokens.
struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::kNonterminal;

  bool terminal() const { return kind == SymbolKind::kTerminal; }
  auto operator<=>(const Symbol&) const = default;

  static Symbol t(std::string name) { return {std::move(name), SymbolKind::kTerminal}; }
  static Symbol nt(std::string name) { return {std::move(name), SymbolKind::kNonterminal}; }
};

// Index into the owning grammar's terminal or nonterminal table.
struct SymbolRef {
  SymbolKind kind = SymbolKind::kNonterminal;
  int index = 0;

  bool terminal() const { return kind == SymbolKind::kTerminal; }
  bool operator==(const SymbolRef&) const = default;
};

struct Rule {
  RuleId id = 0;
  int lhs = 0;
  std::vector<SymbolRef> rhs;
};

// Unweighted context-free grammar without epsilon rules. Immutable once
// built; nonterminals are numbered in order of their first rule.
class Grammar {
 public:
  struct RuleSpec {
    std::string lhs;
    std::vector<Symbol> rhs;
    int line = 0;  // source line for error messages, 0 if unknown
  };

  Grammar() = default;

  // Throws GrammarError when a rule has an empty rhs, a rhs nonterminal has
  // no rules, or the start symbol has no rules. Start defaults to the lhs of
  // the first rule.
  explicit Grammar(std::vector<RuleSpec> specs, std::optional<std::string> start = {}) {
    if (specs.empty()) throw GrammarError("grammar has no rules");
    for (const auto& spec : specs) {
      check_name(spec.lhs, spec.line);
      if (!nonterminal_index_.contains(spec.lhs)) {
        nonterminal_index_.emplace(spec.lhs, static_cast<int>(nonterminals_.size()));
        nonterminals_.push_back(spec.lhs);
      }
    }
    by_lhs_.resize(nonterminals_.size());
    for (const auto& spec : specs) {
      if (spec.rhs.empty()) throw GrammarError("empty right-hand side for " + spec.lhs, spec.line);
      Rule rule;
      rule.id = static_cast<RuleId>(rules_.size());
      rule.lhs = nonterminal_index_.at(spec.lhs);
      for (const auto& sym : spec.rhs) {
        check_name(sym.name, spec.line);
        if (sym.terminal()) {
          auto [it, fresh] = terminal_index_.try_emplace(sym.name, static_cast<int>(terminals_.size()));
          if (fresh) terminals_.push_back(sym.name);
          rule.rhs.push_back({SymbolKind::kTerminal, it->second});
        } else {
          auto it = nonterminal_index_.find(sym.name);
          if (it == nonterminal_index_.end()) {
            throw GrammarError("unknown nonterminal '" + sym.name + "' (no rules)", spec.line);
          }
          rule.rhs.push_back({SymbolKind::kNonterminal, it->second});
        }
      }
      by_lhs_[rule.lhs].push_back(rule.id);
      rules_.push_back(std::move(rule));
    }
    const std::string start_name = start.value_or(specs.front().lhs);
    auto it = nonterminal_index_.find(start_name);
    if (it == nonterminal_index_.end()) {
      throw GrammarError("start symbol '" + start_name + "' has no rules");
    }
    start_ = it->second;
  }

  std::span<const Rule> rules() const { return rules_; }
  const Rule& rule(RuleId id) const { return rules_.at(static_cast<std::size_t>(id)); }
  std::size_t num_rules() const { return rules_.size(); }
  std::span<const RuleId> rules_for(int nonterminal) const { return by_lhs_.at(nonterminal); }

  int start() const { return start_; }
  int num_nonterminals() const { return static_cast<int>(nonterminals_.size()); }
  int num_terminals() const { return static_cast<int>(terminals_.size()); }
  const std::string& nonterminal_name(int i) const { return nonterminals_.at(i); }
  const std::string& terminal_name(int i) const { return terminals_.at(i); }
  const std::string& name(SymbolRef s) const {
    return s.terminal() ? terminal_name(s.index) : nonterminal_name(s.index);
  }
  Symbol symbol(SymbolRef s) const { return {name(s), s.kind}; }

  std::optional<int> find_nonterminal(std::string_view name) const {
    auto it = nonterminal_index_.find(std::string(name));
    if (it == nonterminal_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> find_terminal(std::string_view name) const {
    auto it = terminal_index_.find(std::string(name));
    if (it == terminal_index_.end()) return std::nullopt;
    return it->second;
  }

  // "LHS -> 'tok' Nt ..." in grammar-file notation.
  std::string describe(RuleId id) const;

  // Structural equality: same rules in the same order and the same start.
  bool operator==(const Grammar& other) const {
    if (rules_.size() != other.rules_.size()) return false;
    if (nonterminal_name(start_) != other.nonterminal_name(other.start_)) return false;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      const Rule& a = rules_[r];
      const Rule& b = other.rules_[r];
      if (nonterminal_name(a.lhs) != other.nonterminal_name(b.lhs)) return false;
      if (a.rhs.size() != b.rhs.size()) return false;
      for (std::size_t i = 0; i < a.rhs.size(); ++i) {
        if (symbol(a.rhs[i]) != other.symbol(b.rhs[i])) return false;
      }
    }
    return true;
  }

 private:
  static void check_name(const std::string& name, int line) {
    if (name.empty()) throw GrammarError("empty symbol name", line);
    for (char c : name) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        throw GrammarError("symbol name contains whitespace: '" + name + "'", line);
      }
    }
  }

  std::vector<Rule> rules_;
  std::vector<std::vector<RuleId>> by_lhs_;
  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::unordered_map<std::string, int> nonterminal_index_;
  std::unordered_map<std::string, int> terminal_index_;
  int start_ = 0;
};

namespace detail {

inline std::string quote_terminal(std::string_view tok) {
  std::string out = "'";
  for (char c : tok) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

}  // namespace detail

inline std::string Grammar::describe(RuleId id) const {
  const Rule& r = rule(id);
  std::string out = nonterminal_name(r.lhs) + " ->";
  for (const auto& s : r.rhs) {
    out += ' ';
    out += s.terminal() ? detail::quote_terminal(terminal_name(s.index)) : nonterminal_name(s.index);
  }
  return out;
}

// A grammar plus one weight per rule. The constructor stores weights as
// given; use normalized() to build from raw per-lhs scores, and validate()
// to check the normalization invariant.
class WeightedGrammar {
 public:
  WeightedGrammar() = default;
  WeightedGrammar(Grammar grammar, std::vector<double> weights)
      : grammar_(std::move(grammar)), weights_(std::move(weights)) {
    if (weights_.size() != grammar_.num_rules()) {
      throw DataError("weight vector size does not match rule count");
    }
  }

  // Divides each weight by the sum over rules sharing its lhs. Groups whose
  // sum is already within `keep` of 1 are left untouched, so printed
  // weights survive a reload bit for bit.
  static WeightedGrammar normalized(Grammar grammar, std::vector<double> raw, double keep = 0.0) {
    if (raw.size() != grammar.num_rules()) throw DataError("weight vector size does not match rule count");
    for (int nt = 0; nt < grammar.num_nonterminals(); ++nt) {
      double total = 0.0;
      for (RuleId r : grammar.rules_for(nt)) {
        if (!(raw[r] >= 0.0) || !std::isfinite(raw[r])) {
          throw GrammarError("invalid weight for rule: " + grammar.describe(r));
        }
        total += raw[r];
      }
      if (total <= 0.0) {
        throw GrammarError("weights of " + grammar.nonterminal_name(nt) + " sum to zero");
      }
      if (std::abs(total - 1.0) <= keep) continue;
      for (RuleId r : grammar.rules_for(nt)) raw[r] /= total;
    }
    return WeightedGrammar(std::move(grammar), std::move(raw));
  }

  const Grammar& grammar() const { return grammar_; }
  double weight(RuleId r) const { return weights_.at(static_cast<std::size_t>(r)); }
  std::span<const double> weights() const { return weights_; }

 private:
  Grammar grammar_;
  std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Grammar file format
//
//   # comment
//   %start S
//   S -> 'answer' '(' Var ')' @ 0.5
//
// Quoted symbols are terminals, bare symbols nonterminals. A missing weight
// counts as a raw weight of 1, so a nonterminal without any explicit weights
// ends up uniform. Weights are normalized per lhs on load.
// ---------------------------------------------------------------------------

namespace detail {

struct LexToken {
  std::string text;
  bool quoted = false;
};

inline std::vector<LexToken> lex_grammar_line(std::string_view line, int line_no) {
  std::vector<LexToken> out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    if (line[i] == '#') break;  // trailing comment
    if (line[i] == '\'') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '\\' && i < line.size()) {
          text += line[i++];
        } else if (c == '\'') {
          closed = true;
          break;
        } else {
          text += c;
        }
      }
      if (!closed) throw GrammarError("unterminated quoted terminal", line_no);
      if (i < line.size() && !is_space(line[i])) {
        throw GrammarError("expected whitespace after quoted terminal", line_no);
      }
      out.push_back({std::move(text), true});
    } else {
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      out.push_back({std::string(line.substr(i, j - i)), false});
      i = j;
    }
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool valid_nonterminal_name(const std::string& s) {
  if (s.empty() || s == "->" || s == "@") return false;
  if (s.front() == '%' || s.front() == '@') return false;
  return s.find('\'') == std::string::npos;
}

}  // namespace detail

inline WeightedGrammar load_grammar(std::string_view text) {
  std::vector<Grammar::RuleSpec> specs;
  std::vector<double> raw;
  std::optional<std::string> start;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    auto toks = detail::lex_grammar_line(line, line_no);
    if (toks.empty()) continue;

    if (!toks[0].quoted && toks[0].text == "%start") {
      if (toks.size() != 2 || toks[1].quoted) throw GrammarError("expected '%start Name'", line_no);
      if (start) throw GrammarError("duplicate %start directive", line_no);
      start = toks[1].text;
      continue;
    }
    if (!toks[0].quoted && !toks[0].text.empty() && toks[0].text.front() == '%') {
      throw GrammarError("unknown directive " + toks[0].text, line_no);
    }
    if (toks[0].quoted || !detail::valid_nonterminal_name(toks[0].text)) {
      throw GrammarError("expected nonterminal at start of rule", line_no);
    }
    if (toks.size() < 2 || toks[1].quoted || toks[1].text != "->") {
      throw GrammarError("expected '->' after " + toks[0].text, line_no);
    }

    Grammar::RuleSpec spec{toks[0].text, {}, line_no};
    double weight = 1.0;
    std::size_t end = toks.size();
    for (std::size_t k = 2; k < toks.size(); ++k) {
      if (!toks[k].quoted && toks[k].text == "@") {
        if (k + 2 != toks.size()) throw GrammarError("expected a single weight after '@'", line_no);
        auto w = detail::parse_double(toks[k + 1].text);
        if (!w || toks[k + 1].quoted || !std::isfinite(*w)) {
          throw GrammarError("malformed weight '" + toks[k + 1].text + "'", line_no);
        }
        if (*w < 0.0) throw GrammarError("negative weight " + toks[k + 1].text, line_no);
        weight = *w;
        end = k;
        break;
      }
    }
    for (std::size_t k = 2; k < end; ++k) {
      if (toks[k].quoted) {
        spec.rhs.push_back(Symbol::t(toks[k].text));
      } else {
        if (!detail::valid_nonterminal_name(toks[k].text)) {
          throw GrammarError("bad symbol '" + toks[k].text + "'", line_no);
        }
        spec.rhs.push_back(Symbol::nt(toks[k].text));
      }
    }
    if (spec.rhs.empty()) throw GrammarError("empty right-hand side", line_no);
    specs.push_back(std::move(spec));
    raw.push_back(weight);
  }

  Grammar grammar(std::move(specs), std::move(start));
  return WeightedGrammar::normalized(std::move(grammar), std::move(raw), 1e-9);
}

inline WeightedGrammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grammar file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_grammar(ss.str());
}

// Deterministic inverse of load_grammar: rules in id order, weights with 12
// significant digits.
inline std::string store_grammar(const WeightedGrammar& wg) {
  const Grammar& g = wg.grammar();
  std::string out = "%start " + g.nonterminal_name(g.start()) + "\n";
  char buf[64];
  for (const Rule& r : g.rules()) {
    std::snprintf(buf, sizeof buf, "%.12g", wg.weight(r.id));
    out += g.describe(r.id);
    out += " @ ";
    out += buf;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string code;  // weight-sum, weight-range, unit-cycle, nonproductive, unreachable
  std::string message;
};

// Nonterminals that derive at least one finite terminal string.
inline std::vector<bool> productive_nonterminals(const Grammar& g) {
  std::vector<bool> productive(g.num_nonterminals(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule& r : g.rules()) {
      if (productive[r.lhs]) continue;
      bool ok = std::all_of(r.rhs.begin(), r.rhs.end(),
                            [&](SymbolRef s) { return s.terminal() || productive[s.index]; });
      if (ok) {
        productive[r.lhs] = true;
        changed = true;
      }
    }
  }
  return productive;
}

inline std::vector<bool> reachable_nonterminals(const Grammar& g) {
  std::vector<bool> reach(g.num_nonterminals(), false);
  std::vector<int> stack{g.start()};
  reach[g.start()] = true;
  while (!stack.empty()) {
    int nt = stack.back();
    stack.pop_back();
    for (RuleId r : g.rules_for(nt)) {
      for (SymbolRef s : g.rule(r).rhs) {
        if (!s.terminal() && !reach[s.index]) {
          reach[s.index] = true;
          stack.push_back(s.index);
        }
      }
    }
  }
  return reach;
}

// Unit rules A -> B form a graph; a cycle in it gives some strings infinitely
// many derivations. Returns the nonterminals on such a cycle.
inline std::vector<int> unit_cycle_nonterminals(const Grammar& g) {
  const int n = g.num_nonterminals();
  std::vector<std::vector<int>> succ(n);
  for (const Rule& r : g.rules()) {
    if (r.rhs.size() == 1 && !r.rhs[0].terminal()) succ[r.lhs].push_back(r.rhs[0].index);
  }
  std::vector<int> out;
  for (int s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack(succ[s].begin(), succ[s].end());
    bool cyclic = false;
    while (!stack.empty() && !cyclic) {
      int v = stack.back();
      stack.pop_back();
      if (v == s) cyclic = true;
      if (seen[v]) continue;
      seen[v] = true;
      for (int w : succ[v]) stack.push_back(w);
    }
    if (cyclic) out.push_back(s);
  }
  return out;
}

inline std::vector<Diagnostic> validate(const WeightedGrammar& wg) {
  const Grammar& g = wg.grammar();
  std::vector<Diagnostic> out;
  char buf[128];
  for (const Rule& r : g.rules()) {
    double w = wg.weight(r.id);
    if (!(w >= 0.0 && w <= 1.0)) {
      std::snprintf(buf, sizeof buf, "%.12g", w);
      out.push_back({Severity::kError, "weight-range",
                     "weight " + std::string(buf) + " outside [0, 1]: " + g.describe(r.id)});
    }
  }
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    double total = 0.0;
    for (RuleId r : g.rules_for(nt)) total += wg.weight(r);
    if (std::abs(total - 1.0) > 1e-9) {
      std::snprintf(buf, sizeof buf, "%.12g", total);
      out.push_back({Severity::kError, "weight-sum",
                     "weights of " + g.nonterminal_name(nt) + " sum to " + buf});
    }
  }
  for (int nt : unit_cycle_nonterminals(g)) {
    out.push_back({Severity::kError, "unit-cycle",
                   g.nonterminal_name(nt) + " lies on a cycle of unit rules"});
  }
  auto productive = productive_nonterminals(g);
  auto reachable = reachable_nonterminals(g);
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    if (!productive[nt]) {
      out.push_back({Severity::kWarning, "nonproductive",
                     g.nonterminal_name(nt) + " derives no finite terminal string"});
    }
    if (!reachable[nt]) {
      out.push_back({Severity::kWarning, "unreachable",
                     g.nonterminal_name(nt) + " is unreachable from the start symbol"});
    }
  }
  return out;
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::kError; });
}

}  // namespace mrsynth
