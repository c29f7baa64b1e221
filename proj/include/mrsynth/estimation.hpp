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

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrsynth/binarize.hpp"
#include "mrsynth/chart_parser.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/parallel.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

enum class EstimationMode { kMle, kUniform };

struct EstimationConfig {
  EstimationMode mode = EstimationMode::kMle;
  double smoothing = 0.0;           // add-lambda; 0 keeps unseen rules at zero
  bool skip_over_cap = true;        // false: an over-cap instance is an error
  std::size_t tree_cap = kDefaultTreeCap;
  int jobs = 1;
};

struct EstimationReport {
  std::size_t instances = 0;
  std::size_t parsed = 0;
  std::size_t skipped_unparseable = 0;
  std::size_t skipped_over_cap = 0;
  // Nonterminals no parse touched; they fall back to uniform weights.
  std::vector<std::string> unobserved_nonterminals;
  // Indices of skipped instances, for logging.
  std::vector<std::size_t> skipped_indices;
};

struct EstimationResult {
  WeightedGrammar grammar;
  EstimationReport report;
  RuleCountTable counts;
};

inline WeightedGrammar uniform_weights(const Grammar& g) {
  std::vector<double> w(g.num_rules(), 0.0);
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    auto rules = g.rules_for(nt);
    for (RuleId r : rules) w[r] = 1.0 / static_cast<double>(rules.size());
  }
  return WeightedGrammar(g, std::move(w));
}

// Turns counts into per-lhs relative frequencies with add-lambda smoothing.
// A nonterminal with no mass at all gets uniform weights and is listed in
// unobserved.
inline WeightedGrammar weights_from_counts(const Grammar& g, const RuleCountTable& counts,
                                           double smoothing,
                                           std::vector<std::string>* unobserved = nullptr) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw UsageError("smoothing must be a nonnegative number");
  }
  std::vector<double> w(g.num_rules(), 0.0);
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    auto rules = g.rules_for(nt);
    const double k = static_cast<double>(rules.size());
    double observed = 0.0;
    for (RuleId r : rules) observed += counts.get(r);
    const double total = observed + smoothing * k;
    if (observed <= 0.0 && unobserved) unobserved->push_back(g.nonterminal_name(nt));
    if (total <= 0.0) {
      for (RuleId r : rules) w[r] = 1.0 / k;
      continue;
    }
    for (RuleId r : rules) w[r] = (counts.get(r) + smoothing) / total;
  }
  return WeightedGrammar(g, std::move(w));
}

// Parses every instance, counts rules with 1/N fractional counting over the
// N trees of each instance, and sums the per-instance tables in corpus order
// so the result does not depend on cfg.jobs.
inline EstimationResult estimate(const Grammar& g, const Corpus& corpus, const EstimationConfig& cfg) {
  if (cfg.mode == EstimationMode::kUniform) {
    EstimationResult res{uniform_weights(g), {}, {}};
    res.report.instances = corpus.size();
    return res;
  }
  if (!(cfg.smoothing >= 0.0)) throw UsageError("smoothing must be nonnegative");
  if (corpus.empty()) throw DataError("estimation corpus is empty");

  const BinarizedGrammar bg = binarize(g);
  enum class Outcome { kParsed, kUnparseable, kOverCap };
  std::vector<RuleCountTable> tables(corpus.size());
  std::vector<Outcome> outcomes(corpus.size(), Outcome::kParsed);
  parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
    ParseForest forest = parse_all(bg, corpus[i], cfg.tree_cap);
    if (!forest.parsed()) {
      outcomes[i] = Outcome::kUnparseable;
    } else if (forest.capped()) {
      outcomes[i] = Outcome::kOverCap;
    } else {
      tables[i] = count_rules(forest);
    }
  });

  EstimationResult res;
  res.report.instances = corpus.size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    switch (outcomes[i]) {
      case Outcome::kParsed:
        ++res.report.parsed;
        res.counts += tables[i];
        break;
      case Outcome::kUnparseable:
        ++res.report.skipped_unparseable;
        res.report.skipped_indices.push_back(i);
        break;
      case Outcome::kOverCap:
        if (!cfg.skip_over_cap) {
          throw DataError("instance " + std::to_string(i + 1) + " has more than " +
                          std::to_string(cfg.tree_cap) + " parse trees");
        }
        ++res.report.skipped_over_cap;
        res.report.skipped_indices.push_back(i);
        break;
    }
  }
  if (res.report.parsed == 0) throw DataError("no corpus instance could be parsed; nothing to count");
  res.grammar = weights_from_counts(g, res.counts, cfg.smoothing, &res.report.unobserved_nonterminals);
  return res;
}

inline EstimationResult estimate_mle(const Grammar& g, const Corpus& corpus, EstimationConfig cfg = {}) {
  cfg.mode = EstimationMode::kMle;
  return estimate(g, corpus, cfg);
}

struct RuleDelta {
  RuleId rule = 0;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
};

struct DistributionComparison {
  std::vector<RuleDelta> rules;                        // by rule id
  std::map<std::string, double> total_variation;       // per lhs nonterminal
};

// Per-rule weight differences and, per nonterminal, the total variation
// distance 0.5 * sum |a - b| between the two rule distributions.
inline DistributionComparison compare_distributions(const WeightedGrammar& a, const WeightedGrammar& b) {
  if (!(a.grammar() == b.grammar())) throw DataError("cannot compare weights of different grammars");
  const Grammar& g = a.grammar();
  DistributionComparison out;
  for (const Rule& r : g.rules()) {
    out.rules.push_back({r.id, a.weight(r.id), b.weight(r.id), b.weight(r.id) - a.weight(r.id)});
  }
  for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
    double tv = 0.0;
    for (RuleId r : g.rules_for(nt)) tv += std::abs(a.weight(r) - b.weight(r));
    out.total_variation[g.nonterminal_name(nt)] = 0.5 * tv;
  }
  return out;
}

}  // namespace mrsynth
