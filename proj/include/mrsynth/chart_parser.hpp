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
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrsynth/binarize.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

inline constexpr std::size_t kDefaultTreeCap = 1000;

namespace detail {

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace detail

// Packed CYK chart for one token sequence. Every chart item (span,
// nonterminal) keeps its derivation count and its incoming edges sorted by
// (split point, binary rule id), which fixes the tree enumeration order.
class ParseForest {
 public:
  struct Edge {
    int rule = 0;    // binary rule index
    int split = -1;  // -1 for lexical and unit edges
  };
  struct Item {
    std::uint64_t count = 0;  // saturating
    std::vector<Edge> edges;
  };

  const Tokens& tokens() const { return tokens_; }
  const BinarizedGrammar& grammar() const { return grammar_; }
  std::size_t cap() const { return cap_; }

  // Tokens absent from the grammar's terminal vocabulary.
  const std::vector<std::string>& unknown_tokens() const { return unknown_; }

  bool parsed() const { return root_count() > 0; }
  // More trees than the enumeration cap.
  bool capped() const { return root_count() > cap_; }
  // Exact tree count, or the cap when capped().
  std::uint64_t tree_count() const { return capped() ? cap_ : root_count(); }

  // All trees in deterministic order. Throws DataError when capped().
  std::vector<ParseTree> trees() const {
    if (capped()) {
      throw DataError("forest has more than " + std::to_string(cap_) + " trees");
    }
    return enumerate(cap_);
  }

  // Up to limit trees in deterministic order.
  std::vector<ParseTree> enumerate(std::size_t limit) const {
    if (!parsed() || limit == 0) return {};
    Enumerator e{*this, limit, {}, {}};
    return e.trees(0, static_cast<int>(tokens_.size()), grammar_.original().start());
  }

  // First tree in the deterministic order.
  std::optional<ParseTree> canonical_tree() const {
    auto t = enumerate(1);
    if (t.empty()) return std::nullopt;
    return std::move(t.front());
  }

  // log of the sum over all trees of the product of rule weights. -inf when
  // the string is unparseable or every tree uses a zero-weight rule.
  double log_inside(std::span<const double> weights) const {
    if (!parsed()) return -INFINITY;
    const int n = static_cast<int>(tokens_.size());
    std::vector<std::unordered_map<int, double>> memo(cells_.size());
    auto rule_logw = [&](const BinaryRule& br) {
      if (!br.completes_source) return 0.0;
      double w = weights[*br.source];
      return w > 0.0 ? std::log(w) : -INFINITY;
    };
    auto inside = [&](auto&& self, int i, int j, int nt) -> double {
      auto& m = memo[cell_index(i, j)];
      if (auto it = m.find(nt); it != m.end()) return it->second;
      const Item& item = cells_[cell_index(i, j)].at(nt);
      double total = -INFINITY;
      for (const Edge& e : item.edges) {
        const BinaryRule& br = grammar_.rule(e.rule);
        double lp = rule_logw(br);
        if (lp == -INFINITY) continue;
        if (br.unit()) {
          lp += self(self, i, j, br.rhs[0].index);
        } else if (!br.lexical()) {
          lp += self(self, i, e.split, br.rhs[0].index);
          if (lp != -INFINITY) lp += self(self, e.split, j, br.rhs[1].index);
        }
        total = detail::log_add(total, lp);
      }
      m.emplace(nt, total);
      return total;
    };
    return inside(inside, 0, n, grammar_.original().start());
  }

  const Item* item(int i, int j, int nt) const {
    const auto& cell = cells_[cell_index(i, j)];
    auto it = cell.find(nt);
    return it == cell.end() ? nullptr : &it->second;
  }

 private:
  friend ParseForest parse_all(const BinarizedGrammar&, std::span<const std::string>, std::size_t);
  explicit ParseForest(const BinarizedGrammar& g) : grammar_(g) {}

  std::size_t cell_index(int i, int j) const {
    // Spans [i, j) with 0 <= i < j <= n, laid out row by row.
    const std::size_t n = tokens_.size();
    return static_cast<std::size_t>(i) * (n + 1) + static_cast<std::size_t>(j);
  }

  std::uint64_t root_count() const {
    if (tokens_.empty() || cells_.empty()) return 0;
    const Item* it = item(0, static_cast<int>(tokens_.size()), grammar_.original().start());
    return it ? it->count : 0;
  }

  // Trees are built straight in the original grammar: an item of an
  // intermediate or preterminal contributes a "frontier", the ordered list of
  // original-nonterminal subtrees it covers.
  struct Enumerator {
    using Frontier = std::vector<ParseTree>;
    const ParseForest& f;
    std::size_t limit;
    std::map<std::tuple<int, int, int>, std::vector<ParseTree>> tree_memo;
    std::map<std::tuple<int, int, int>, std::vector<Frontier>> frontier_memo;

    std::vector<Frontier> frontiers(int i, int j, int nt) {
      const auto& g = f.grammar_;
      if (g.kind(nt) == BinarizedKind::kOriginal) {
        std::vector<Frontier> out;
        for (auto& t : trees(i, j, nt)) out.push_back(Frontier{std::move(t)});
        return out;
      }
      if (g.kind(nt) == BinarizedKind::kPreterminal) return {Frontier{}};
      auto key = std::make_tuple(i, j, nt);
      if (auto it = frontier_memo.find(key); it != frontier_memo.end()) return it->second;
      std::vector<Frontier> out;
      const Item* item = f.item(i, j, nt);
      for (const Edge& e : item->edges) {
        const BinaryRule& br = g.rule(e.rule);
        combine(i, j, e, br, [&](Frontier&& fr) { out.push_back(std::move(fr)); });
        if (out.size() >= limit) break;
      }
      if (out.size() > limit) out.resize(limit);
      frontier_memo.emplace(key, out);
      return out;
    }

    std::vector<ParseTree> trees(int i, int j, int nt) {
      auto key = std::make_tuple(i, j, nt);
      if (auto it = tree_memo.find(key); it != tree_memo.end()) return it->second;
      const auto& g = f.grammar_;
      std::vector<ParseTree> out;
      const Item* item = f.item(i, j, nt);
      for (const Edge& e : item->edges) {
        const BinaryRule& br = g.rule(e.rule);
        RuleId source = *br.source;
        if (br.lexical()) {
          out.push_back(ParseTree{source, {}});
        } else if (br.unit()) {
          for (auto& t : trees(i, j, br.rhs[0].index)) {
            out.push_back(ParseTree{source, {std::move(t)}});
            if (out.size() >= limit) break;
          }
        } else {
          combine(i, j, e, br, [&](Frontier&& fr) { out.push_back(ParseTree{source, std::move(fr)}); });
        }
        if (out.size() >= limit) break;
      }
      if (out.size() > limit) out.resize(limit);
      tree_memo.emplace(key, out);
      return out;
    }

    template <typename Emit>
    void combine(int i, int j, const Edge& e, const BinaryRule& br, Emit emit) {
      if (br.lexical()) {
        emit(Frontier{});
        return;
      }
      auto left = frontiers(i, e.split, br.rhs[0].index);
      auto right = frontiers(e.split, j, br.rhs[1].index);
      std::size_t emitted = 0;
      for (const auto& l : left) {
        for (const auto& r : right) {
          Frontier fr = l;
          fr.insert(fr.end(), r.begin(), r.end());
          emit(std::move(fr));
          if (++emitted >= limit) return;
        }
      }
    }
  };

  BinarizedGrammar grammar_;
  Tokens tokens_;
  std::vector<std::string> unknown_;
  std::size_t cap_ = kDefaultTreeCap;
  std::vector<std::map<int, Item>> cells_;
};

// CYK over the binarized grammar with unit closure in every cell.
inline ParseForest parse_all(const BinarizedGrammar& g, std::span<const std::string> tokens,
                             std::size_t cap = kDefaultTreeCap) {
  ParseForest f(g);
  f.tokens_.assign(tokens.begin(), tokens.end());
  f.cap_ = cap;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return f;

  const Grammar& og = g.original();
  std::vector<int> term(n, -1);
  for (int i = 0; i < n; ++i) {
    auto t = og.find_terminal(tokens[i]);
    if (!t) {
      if (std::find(f.unknown_.begin(), f.unknown_.end(), tokens[i]) == f.unknown_.end()) {
        f.unknown_.push_back(tokens[i]);
      }
    } else {
      term[i] = *t;
    }
  }
  if (!f.unknown_.empty()) return f;

  f.cells_.resize(static_cast<std::size_t>(n) * (n + 1) + n + 1);

  auto close_units = [&](std::map<int, ParseForest::Item>& cell) {
    for (int nt : g.unit_order()) {
      auto it = cell.find(nt);
      if (it == cell.end()) continue;
      std::uint64_t c = it->second.count;
      for (int ri : g.unit_rules_by_child(nt)) {
        auto& parent = cell[g.rule(ri).lhs];
        parent.count = detail::sat_add(parent.count, c);
        parent.edges.push_back({ri, -1});
      }
    }
  };
  auto sort_edges = [](std::map<int, ParseForest::Item>& cell) {
    for (auto& [nt, item] : cell) {
      std::sort(item.edges.begin(), item.edges.end(), [](const auto& a, const auto& b) {
        return a.split != b.split ? a.split < b.split : a.rule < b.rule;
      });
    }
  };

  for (int i = 0; i < n; ++i) {
    auto& cell = f.cells_[f.cell_index(i, i + 1)];
    for (int ri : g.lexical_rules(term[i])) {
      auto& item = cell[g.rule(ri).lhs];
      item.count = detail::sat_add(item.count, 1);
      item.edges.push_back({ri, -1});
    }
    close_units(cell);
    sort_edges(cell);
  }
  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      auto& cell = f.cells_[f.cell_index(i, j)];
      for (int k = i + 1; k < j; ++k) {
        const auto& left = f.cells_[f.cell_index(i, k)];
        const auto& right = f.cells_[f.cell_index(k, j)];
        if (left.empty() || right.empty()) continue;
        for (const auto& [b, bitem] : left) {
          for (int ri : g.binary_rules_by_first(b)) {
            const BinaryRule& br = g.rule(ri);
            auto rit = right.find(br.rhs[1].index);
            if (rit == right.end()) continue;
            auto& item = cell[br.lhs];
            item.count = detail::sat_add(item.count, detail::sat_mul(bitem.count, rit->second.count));
            item.edges.push_back({ri, k});
          }
        }
      }
      close_units(cell);
      sort_edges(cell);
    }
  }
  return f;
}

inline ParseForest parse_all(const BinarizedGrammar& g, const Tokens& tokens,
                             std::size_t cap = kDefaultTreeCap) {
  return parse_all(g, std::span<const std::string>(tokens), cap);
}

// Fractional rule counts: each of the N trees contributes its rule
// occurrences scaled by 1/N.
inline RuleCountTable count_rules(const ParseForest& forest) {
  if (!forest.parsed()) throw DataError("cannot count rules of an empty forest");
  if (forest.capped()) throw DataError("forest exceeds the enumeration cap of " + std::to_string(forest.cap()));
  auto trees = forest.trees();
  const double scale = 1.0 / static_cast<double>(trees.size());
  RuleCountTable table;
  for (const auto& t : trees) table.add_tree(t, scale);
  return table;
}

}  // namespace mrsynth
