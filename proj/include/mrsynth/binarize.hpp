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

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrsynth/grammar.hpp"

namespace mrsynth {

// Rules of a binarized grammar. Nonterminal indices below
// original_nonterminals() coincide with the source grammar's; above that come
// the chain intermediates and the terminal preterminals.
struct BinaryRule {
  int lhs = 0;
  std::array<SymbolRef, 2> rhs{};
  int arity = 1;
  // Original rule this binary rule was cut from. Empty for preterminal rules.
  std::optional<RuleId> source;
  // True for the one rule of a chain whose lhs is the original lhs.
  bool completes_source = false;

  bool lexical() const { return arity == 1 && rhs[0].terminal(); }
  bool unit() const { return arity == 1 && !rhs[0].terminal(); }
};

enum class BinarizedKind { kOriginal, kIntermediate, kPreterminal };

// Every original rule A -> X1 ... Xn with n > 2 becomes a left-branching
// chain  @r.1 -> X1 X2,  @r.2 -> @r.1 X3, ...,  A -> @r.(n-2) Xn.  Terminals
// inside rules of length two or more are replaced by a shared preterminal
// @'tok' -> 'tok'. Length-1 rules are kept as they are. Derivations of the
// two grammars are in bijection. Cheap to copy.
class BinarizedGrammar {
 public:
  const Grammar& original() const { return data_->original; }
  const std::vector<BinaryRule>& rules() const { return data_->rules; }
  const BinaryRule& rule(int i) const { return data_->rules.at(i); }

  int num_nonterminals() const { return static_cast<int>(data_->names.size()); }
  int original_nonterminals() const { return data_->original.num_nonterminals(); }
  const std::string& nonterminal_name(int i) const { return data_->names.at(i); }
  BinarizedKind kind(int nt) const { return data_->kinds.at(nt); }

  // Rules X -> 't' for terminal index t.
  const std::vector<int>& lexical_rules(int terminal) const { return data_->lexical.at(terminal); }
  // Binary rules whose first child is nonterminal nt.
  const std::vector<int>& binary_rules_by_first(int nt) const { return data_->by_first.at(nt); }
  // Unit rules A -> nt.
  const std::vector<int>& unit_rules_by_child(int nt) const { return data_->unit_by_child.at(nt); }
  // Nonterminals ordered so that for every unit rule A -> B, B precedes A.
  const std::vector<int>& unit_order() const { return data_->unit_order; }

  // Number of binary rules carrying each original rule id.
  std::vector<int> chain_lengths() const {
    std::vector<int> out(original().num_rules(), 0);
    for (const auto& r : rules()) {
      if (r.source) ++out[*r.source];
    }
    return out;
  }

 private:
  struct Data {
    Grammar original;
    std::vector<BinaryRule> rules;
    std::vector<std::string> names;
    std::vector<BinarizedKind> kinds;
    std::vector<std::vector<int>> lexical;
    std::vector<std::vector<int>> by_first;
    std::vector<std::vector<int>> unit_by_child;
    std::vector<int> unit_order;
  };

  explicit BinarizedGrammar(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  std::shared_ptr<const Data> data_;

  friend BinarizedGrammar binarize(const Grammar& g);
};

// Throws GrammarError if the grammar has a unit-rule cycle, since such a
// grammar gives some strings infinitely many parses.
inline BinarizedGrammar binarize(const Grammar& g) {
  if (auto cyc = unit_cycle_nonterminals(g); !cyc.empty()) {
    throw GrammarError("cannot parse with unit-rule cycle through " + g.nonterminal_name(cyc.front()));
  }
  auto d = std::make_shared<BinarizedGrammar::Data>();
  d->original = g;
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    d->names.push_back(g.nonterminal_name(nt));
    d->kinds.push_back(BinarizedKind::kOriginal);
  }
  std::vector<int> preterminal(g.num_terminals(), -1);
  auto fresh = [&](std::string name, BinarizedKind kind) {
    d->names.push_back(std::move(name));
    d->kinds.push_back(kind);
    return static_cast<int>(d->names.size()) - 1;
  };
  // Preterminal rules are appended after all rule chains; collect them here.
  std::vector<int> preterminal_order;
  auto lift = [&](SymbolRef s) -> SymbolRef {
    if (!s.terminal()) return s;
    if (preterminal[s.index] < 0) {
      preterminal[s.index] = fresh("@" + detail::quote_terminal(g.terminal_name(s.index)),
                                   BinarizedKind::kPreterminal);
      preterminal_order.push_back(s.index);
    }
    return {SymbolKind::kNonterminal, preterminal[s.index]};
  };

  for (const Rule& r : g.rules()) {
    const std::size_t n = r.rhs.size();
    if (n == 1) {
      d->rules.push_back({r.lhs, {r.rhs[0], SymbolRef{}}, 1, r.id, true});
      continue;
    }
    std::vector<SymbolRef> rhs;
    for (SymbolRef s : r.rhs) rhs.push_back(lift(s));
    SymbolRef left = rhs[0];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      int mid = fresh("@" + std::to_string(r.id) + "." + std::to_string(k), BinarizedKind::kIntermediate);
      d->rules.push_back({mid, {left, rhs[k]}, 2, r.id, false});
      left = {SymbolKind::kNonterminal, mid};
    }
    d->rules.push_back({r.lhs, {left, rhs[n - 1]}, 2, r.id, true});
  }
  for (int t : preterminal_order) {
    d->rules.push_back({preterminal[t], {SymbolRef{SymbolKind::kTerminal, t}, SymbolRef{}}, 1,
                        std::nullopt, false});
  }

  const int nts = static_cast<int>(d->names.size());
  d->lexical.resize(g.num_terminals());
  d->by_first.resize(nts);
  d->unit_by_child.resize(nts);
  for (int i = 0; i < static_cast<int>(d->rules.size()); ++i) {
    const BinaryRule& br = d->rules[i];
    if (br.lexical()) {
      d->lexical[br.rhs[0].index].push_back(i);
    } else if (br.unit()) {
      d->unit_by_child[br.rhs[0].index].push_back(i);
    } else {
      d->by_first[br.rhs[0].index].push_back(i);
    }
  }

  // Kahn's algorithm on the unit graph, edges child -> parent.
  std::vector<int> indegree(nts, 0);
  for (const auto& br : d->rules) {
    if (br.unit()) ++indegree[br.lhs];
  }
  std::vector<int> ready;
  for (int nt = nts - 1; nt >= 0; --nt) {
    if (indegree[nt] == 0) ready.push_back(nt);
  }
  while (!ready.empty()) {
    int nt = ready.back();
    ready.pop_back();
    d->unit_order.push_back(nt);
    for (int ri : d->unit_by_child[nt]) {
      if (--indegree[d->rules[ri].lhs] == 0) ready.push_back(d->rules[ri].lhs);
    }
  }

  return BinarizedGrammar(std::move(d));
}

}  // namespace mrsynth
