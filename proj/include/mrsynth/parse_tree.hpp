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
#include <cmath>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mrsynth/error.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

// A derivation in the original (unbinarized) grammar. children has one entry
// per nonterminal on the rule's rhs, in order; terminals carry no subtree.
struct ParseTree {
  RuleId rule = 0;
  std::vector<ParseTree> children;

  bool operator==(const ParseTree&) const = default;
};

inline Tokens tree_yield(const Grammar& g, const ParseTree& t) {
  Tokens out;
  auto walk = [&](auto&& self, const ParseTree& node) -> void {
    std::size_t child = 0;
    for (SymbolRef s : g.rule(node.rule).rhs) {
      if (s.terminal()) {
        out.push_back(g.terminal_name(s.index));
      } else {
        self(self, node.children.at(child++));
      }
    }
  };
  walk(walk, t);
  return out;
}

// True iff every node's children match its rule's rhs nonterminals.
inline bool tree_well_formed(const Grammar& g, const ParseTree& t) {
  if (t.rule < 0 || static_cast<std::size_t>(t.rule) >= g.num_rules()) return false;
  const Rule& r = g.rule(t.rule);
  std::size_t child = 0;
  for (SymbolRef s : r.rhs) {
    if (s.terminal()) continue;
    if (child >= t.children.size()) return false;
    const ParseTree& c = t.children[child++];
    if (c.rule < 0 || static_cast<std::size_t>(c.rule) >= g.num_rules()) return false;
    if (g.rule(c.rule).lhs != s.index) return false;
    if (!tree_well_formed(g, c)) return false;
  }
  return child == t.children.size();
}

// Bracketed rendering, e.g. (S 'a' (S 'b')).
inline std::string tree_to_string(const Grammar& g, const ParseTree& t) {
  const Rule& r = g.rule(t.rule);
  std::string out = "(" + g.nonterminal_name(r.lhs);
  std::size_t child = 0;
  for (SymbolRef s : r.rhs) {
    out += ' ';
    if (s.terminal()) {
      out += detail::quote_terminal(g.terminal_name(s.index));
    } else {
      out += tree_to_string(g, t.children.at(child++));
    }
  }
  return out + ")";
}

inline std::size_t tree_size(const ParseTree& t) {
  std::size_t n = 1;
  for (const auto& c : t.children) n += tree_size(c);
  return n;
}

// Maximum over root-to-leaf paths of the number of nodes whose lhs is target,
// minus one. -1 when target does not occur.
inline int tree_depth(const Grammar& g, const ParseTree& t, int target) {
  int below = 0;
  for (const auto& c : t.children) below = std::max(below, tree_depth(g, c, target) + 1);
  // below is now (max count on a child path), with 0 for leaves.
  int here = g.rule(t.rule).lhs == target ? 1 : 0;
  int count = here + below;
  return count - 1;
}

// Depth of every nonterminal that occurs in t.
inline std::map<std::string, int> tree_depths(const Grammar& g, const ParseTree& t) {
  std::map<int, int> counts;  // nt -> max occurrences on a path
  auto walk = [&](auto&& self, const ParseTree& node, std::map<int, int>& on_path) -> void {
    int lhs = g.rule(node.rule).lhs;
    int c = ++on_path[lhs];
    auto& best = counts[lhs];
    best = std::max(best, c);
    for (const auto& ch : node.children) self(self, ch, on_path);
    --on_path[lhs];
  };
  std::map<int, int> on_path;
  walk(walk, t, on_path);
  std::map<std::string, int> out;
  for (auto [nt, c] : counts) out[g.nonterminal_name(nt)] = c - 1;
  return out;
}

// A parent node together with its ordered children (a 2-LS). Terminal
// children are rendered quoted so they cannot collide with nonterminals.
struct LocalStructure {
  std::string parent;
  std::vector<std::string> children;

  auto operator<=>(const LocalStructure&) const = default;

  std::string to_string() const {
    std::string out = parent + " ->";
    for (const auto& c : children) out += " " + c;
    return out;
  }
};

inline LocalStructure rule_shape(const Grammar& g, RuleId id) {
  const Rule& r = g.rule(id);
  LocalStructure ls{g.nonterminal_name(r.lhs), {}};
  for (SymbolRef s : r.rhs) {
    ls.children.push_back(s.terminal() ? detail::quote_terminal(g.terminal_name(s.index))
                                       : g.nonterminal_name(s.index));
  }
  return ls;
}

inline std::set<LocalStructure> local_structures(const Grammar& g, const ParseTree& t, int order = 2) {
  if (order != 2) throw UsageError("only order-2 local structures are supported");
  std::set<LocalStructure> out;
  auto walk = [&](auto&& self, const ParseTree& node) -> void {
    out.insert(rule_shape(g, node.rule));
    for (const auto& c : node.children) self(self, c);
  };
  walk(walk, t);
  return out;
}

// Fractional rule counts, keyed by rule id.
class RuleCountTable {
 public:
  void add(RuleId r, double c) { counts_[r] += c; }
  double get(RuleId r) const {
    auto it = counts_.find(r);
    return it == counts_.end() ? 0.0 : it->second;
  }
  const std::map<RuleId, double>& entries() const { return counts_; }
  bool empty() const { return counts_.empty(); }

  // Adds scale times the rule occurrences of t.
  void add_tree(const ParseTree& t, double scale = 1.0) {
    add(t.rule, scale);
    for (const auto& c : t.children) add_tree(c, scale);
  }

  RuleCountTable& operator+=(const RuleCountTable& other) {
    for (auto [r, c] : other.counts_) counts_[r] += c;
    return *this;
  }
  friend RuleCountTable operator+(RuleCountTable a, const RuleCountTable& b) { return a += b; }

  bool operator==(const RuleCountTable&) const = default;

 private:
  std::map<RuleId, double> counts_;
};

}  // namespace mrsynth
