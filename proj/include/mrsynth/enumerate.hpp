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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrsynth/error.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

namespace detail {

// Nonterminals that are reachable and productive, and for each of them the
// rules whose rhs nonterminals are all productive.
struct UsefulPart {
  std::vector<bool> useful;
  std::vector<std::vector<RuleId>> rules;
};

inline UsefulPart useful_part(const Grammar& g) {
  auto productive = productive_nonterminals(g);
  auto reachable = reachable_nonterminals(g);
  UsefulPart u;
  u.useful.resize(g.num_nonterminals());
  u.rules.resize(g.num_nonterminals());
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    u.useful[nt] = productive[nt] && reachable[nt];
    if (!u.useful[nt]) continue;
    for (RuleId r : g.rules_for(nt)) {
      const auto& rhs = g.rule(r).rhs;
      if (std::all_of(rhs.begin(), rhs.end(), [&](SymbolRef s) { return s.terminal() || productive[s.index]; })) {
        u.rules[nt].push_back(r);
      }
    }
  }
  return u;
}

// Topological order (children before parents) of the useful nonterminals,
// or nullopt if they contain a cycle.
inline std::optional<std::vector<int>> useful_topological_order(const Grammar& g, const UsefulPart& u) {
  enum Mark : char { kNew, kActive, kDone };
  std::vector<char> mark(g.num_nonterminals(), kNew);
  std::vector<int> order;
  bool cyclic = false;
  auto visit = [&](auto&& self, int nt) -> void {
    if (cyclic || mark[nt] == kDone) return;
    if (mark[nt] == kActive) {
      cyclic = true;
      return;
    }
    mark[nt] = kActive;
    for (RuleId r : u.rules[nt]) {
      for (SymbolRef s : g.rule(r).rhs) {
        if (!s.terminal()) self(self, s.index);
      }
    }
    mark[nt] = kDone;
    order.push_back(nt);
  };
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    if (u.useful[nt]) visit(visit, nt);
  }
  if (cyclic) return std::nullopt;
  return order;
}

}  // namespace detail

// A language is finite iff no useful nonterminal can reach itself.
inline bool language_is_finite(const Grammar& g) {
  auto u = detail::useful_part(g);
  return detail::useful_topological_order(g, u).has_value();
}

struct LanguageEnumeration {
  bool finite = false;
  std::vector<Tokens> strings;  // distinct, length-then-lexicographic order
};

// Computes, per nonterminal, the set of derivable terminal strings (up to
// max_len tokens when given) and returns the start symbol's set. Finite
// languages are built in one bottom-up pass; recursive grammars need max_len
// and are iterated to a fixpoint.
inline LanguageEnumeration enumerate_language(const Grammar& g, std::optional<std::size_t> max_len = std::nullopt) {
  using Str = std::vector<int>;
  auto u = detail::useful_part(g);
  auto order = detail::useful_topological_order(g, u);
  LanguageEnumeration out;
  out.finite = order.has_value();
  if (!out.finite && !max_len) {
    throw UsageError("grammar is recursive; its language is infinite and needs a length bound");
  }
  const std::size_t bound = max_len.value_or(SIZE_MAX);

  std::vector<std::set<Str>> lang(g.num_nonterminals());
  auto expand_rule = [&](RuleId r) {
    std::vector<Str> partial{Str{}};
    for (SymbolRef s : g.rule(r).rhs) {
      std::vector<Str> next;
      if (s.terminal()) {
        for (auto& p : partial) {
          if (p.size() + 1 > bound) continue;
          p.push_back(s.index);
          next.push_back(std::move(p));
        }
      } else {
        for (const auto& p : partial) {
          for (const auto& q : lang[s.index]) {
            if (p.size() + q.size() > bound) continue;
            Str c = p;
            c.insert(c.end(), q.begin(), q.end());
            next.push_back(std::move(c));
          }
        }
      }
      partial = std::move(next);
      if (partial.empty()) break;
    }
    return partial;
  };

  if (out.finite) {
    for (int nt : *order) {
      for (RuleId r : u.rules[nt]) {
        for (auto& s : expand_rule(r)) lang[nt].insert(std::move(s));
      }
    }
  } else {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
        if (!u.useful[nt]) continue;
        for (RuleId r : u.rules[nt]) {
          for (auto& s : expand_rule(r)) {
            if (lang[nt].insert(std::move(s)).second) changed = true;
          }
        }
      }
    }
  }

  const auto& start = lang[g.start()];
  out.strings.reserve(start.size());
  for (const auto& s : start) {
    Tokens t;
    t.reserve(s.size());
    for (int i : s) t.push_back(g.terminal_name(i));
    out.strings.push_back(std::move(t));
  }
  std::sort(out.strings.begin(), out.strings.end(), [](const Tokens& a, const Tokens& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace mrsynth
