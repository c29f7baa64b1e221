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

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrsynth/binarize.hpp"
#include "mrsynth/chart_parser.hpp"
#include "mrsynth/dataset.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/parallel.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

// Coverage metrics count distinct types, not occurrences.

inline std::set<Tokens> ngram_types(const Corpus& corpus, int n) {
  std::set<Tokens> out;
  for (const auto& seq : corpus) {
    if (seq.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) out.emplace(seq.begin() + i, seq.begin() + i + n);
  }
  return out;
}

// Percentage of distinct test n-grams that occur anywhere in train. A test
// corpus without any n-gram of this order is vacuously covered (100).
inline double ngram_coverage(const Corpus& train, const Corpus& test, int n) {
  if (n < 1) throw UsageError("n-gram order must be at least 1");
  if (test.empty()) throw DataError("test corpus is empty");
  auto test_types = ngram_types(test, n);
  if (test_types.empty()) return 100.0;
  auto train_types = ngram_types(train, n);
  std::size_t covered = 0;
  for (const auto& t : test_types) covered += train_types.contains(t);
  return 100.0 * static_cast<double>(covered) / static_cast<double>(test_types.size());
}

// Percentage of distinct test sequences that appear verbatim in train.
inline double instance_coverage(const Corpus& train, const Corpus& test) {
  if (test.empty()) throw DataError("test corpus is empty");
  std::set<Tokens> train_set(train.begin(), train.end());
  std::set<Tokens> test_set(test.begin(), test.end());
  std::size_t covered = 0;
  for (const auto& t : test_set) covered += train_set.contains(t);
  return 100.0 * static_cast<double>(covered) / static_cast<double>(test_set.size());
}

inline double average_length(const Corpus& corpus) {
  if (corpus.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& s : corpus) total += s.size();
  return static_cast<double>(total) / static_cast<double>(corpus.size());
}

// Canonical (first) parse tree of every instance; nullopt when unparseable.
inline std::vector<std::optional<ParseTree>> canonical_parses(const BinarizedGrammar& bg, const Corpus& corpus,
                                                              int jobs = 1) {
  std::vector<std::optional<ParseTree>> out(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) { out[i] = parse_all(bg, corpus[i]).canonical_tree(); });
  return out;
}

struct StructureCoverage {
  double percentage = 0.0;
  std::vector<LocalStructure> uncovered;  // sorted
  std::size_t skipped_train = 0;
  std::size_t skipped_test = 0;
};

// Coverage of the test set's 2-LS keys (over canonical parses) by the
// training set's.
inline StructureCoverage structure_coverage(const Grammar& g, const Corpus& train, const Corpus& test, int jobs = 1) {
  const BinarizedGrammar bg = binarize(g);
  StructureCoverage out;
  std::set<LocalStructure> train_keys, test_keys;
  for (const auto& t : canonical_parses(bg, train, jobs)) {
    if (!t) {
      ++out.skipped_train;
      continue;
    }
    auto ks = local_structures(g, *t);
    train_keys.insert(ks.begin(), ks.end());
  }
  for (const auto& t : canonical_parses(bg, test, jobs)) {
    if (!t) {
      ++out.skipped_test;
      continue;
    }
    auto ks = local_structures(g, *t);
    test_keys.insert(ks.begin(), ks.end());
  }
  if (test_keys.empty()) throw DataError("no test instance could be parsed");
  std::size_t covered = 0;
  for (const auto& k : test_keys) {
    if (train_keys.contains(k)) {
      ++covered;
    } else {
      out.uncovered.push_back(k);
    }
  }
  out.percentage = 100.0 * static_cast<double>(covered) / static_cast<double>(test_keys.size());
  return out;
}

struct DepthHistogram {
  // target -> depth -> number of instances
  std::map<std::string, std::map<int, std::size_t>> counts;
  std::size_t skipped_unparseable = 0;
};

// Per-instance tree_depth of each target over the canonical parse. A target
// that is not a nonterminal of g lands in the -1 bucket.
inline DepthHistogram depth_histogram(const Grammar& g, const Corpus& corpus, const std::vector<std::string>& targets,
                                      int jobs = 1) {
  DepthHistogram out;
  if (corpus.empty()) return out;
  const BinarizedGrammar bg = binarize(g);
  for (const auto& t : canonical_parses(bg, corpus, jobs)) {
    if (!t) {
      ++out.skipped_unparseable;
      continue;
    }
    for (const auto& name : targets) {
      auto nt = g.find_nonterminal(name);
      int d = nt ? tree_depth(g, *t, *nt) : -1;
      ++out.counts[name][d];
    }
  }
  return out;
}

struct PerplexityReport {
  double total_logprob = 0.0;  // natural log, over scored instances
  std::size_t token_count = 0;
  std::optional<double> perplexity;  // absent when nothing could be scored
  std::size_t scored = 0;
  std::size_t unparseable = 0;
  std::size_t zero_probability = 0;
};

// P(y) is the inside probability of the whole string (sum over all parse
// trees). Perplexity = exp(-sum log P(y) / sum |y|) over instances with
// P(y) > 0; the others are tallied but left out.
inline PerplexityReport mr_perplexity(const WeightedGrammar& wg, const Corpus& corpus, int jobs = 1) {
  const BinarizedGrammar bg = binarize(wg.grammar());
  std::vector<double> logp(corpus.size());
  std::vector<char> parsed(corpus.size(), 0);
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    ParseForest f = parse_all(bg, corpus[i], 1);
    parsed[i] = f.parsed();
    logp[i] = f.parsed() ? f.log_inside(wg.weights()) : -INFINITY;
  });
  PerplexityReport rep;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!parsed[i]) {
      ++rep.unparseable;
    } else if (logp[i] == -INFINITY) {
      ++rep.zero_probability;
    } else {
      ++rep.scored;
      rep.total_logprob += logp[i];
      rep.token_count += corpus[i].size();
    }
  }
  if (rep.token_count > 0) rep.perplexity = std::exp(-rep.total_logprob / static_cast<double>(rep.token_count));
  return rep;
}

// ---------------------------------------------------------------------------
// Dataset statistics report: average length, n-gram coverage and instance
// coverage of the test set, for the English and the MR side, computed for
// the original training set and for training plus augmentation data.
// ---------------------------------------------------------------------------

struct CoverageReport {
  std::string side;  // "english" or "mr"
  double avg_length = 0.0;
  std::map<int, double> ngram_coverage;
  double instance_coverage = 0.0;
  // MR side only.
  std::optional<double> structure_coverage;
  std::vector<std::string> uncovered_structures;
  std::map<std::string, std::map<int, std::size_t>> depth_histogram;
  std::size_t skipped_unparseable = 0;

  bool operator==(const CoverageReport&) const = default;
};

struct ReportRow {
  std::string name;  // "train" or "train+augmented"
  std::size_t instances = 0;
  CoverageReport english;
  CoverageReport mr;

  bool operator==(const ReportRow&) const = default;
};

struct DatasetReport {
  std::vector<ReportRow> rows;

  bool operator==(const DatasetReport&) const = default;
};

struct ReportOptions {
  std::vector<int> ngram_orders{2};
  std::vector<std::string> depth_targets;
  int jobs = 1;
};

inline ReportRow build_report_row(const std::string& name, const Grammar& g, const ParallelDataset& train,
                                  const ParallelDataset& test, const ReportOptions& opts) {
  ReportRow row;
  row.name = name;
  row.instances = train.size();
  const Corpus train_en = train.sentence_corpus(), test_en = test.sentence_corpus();
  const Corpus train_mr = train.mr_corpus(), test_mr = test.mr_corpus();

  row.english.side = "english";
  row.english.avg_length = average_length(train_en);
  row.mr.side = "mr";
  row.mr.avg_length = average_length(train_mr);
  for (int n : opts.ngram_orders) {
    row.english.ngram_coverage[n] = ngram_coverage(train_en, test_en, n);
    row.mr.ngram_coverage[n] = ngram_coverage(train_mr, test_mr, n);
  }
  row.english.instance_coverage = instance_coverage(train_en, test_en);
  row.mr.instance_coverage = instance_coverage(train_mr, test_mr);

  auto sc = structure_coverage(g, train_mr, test_mr, opts.jobs);
  row.mr.structure_coverage = sc.percentage;
  for (const auto& k : sc.uncovered) row.mr.uncovered_structures.push_back(k.to_string());
  row.mr.skipped_unparseable = sc.skipped_train + sc.skipped_test;
  if (!opts.depth_targets.empty()) {
    row.mr.depth_histogram = depth_histogram(g, train_mr, opts.depth_targets, opts.jobs).counts;
  }
  return row;
}

inline DatasetReport build_report(const Grammar& g, const ParallelDataset& train, const ParallelDataset& test,
                                  const ParallelDataset* augmented, const ReportOptions& opts = {}) {
  if (test.empty()) throw DataError("test dataset is empty");
  if (train.empty()) throw DataError("train dataset is empty");
  DatasetReport rep;
  rep.rows.push_back(build_report_row("train", g, train, test, opts));
  if (augmented) {
    ParallelDataset both = train;
    both.records.insert(both.records.end(), augmented->records.begin(), augmented->records.end());
    rep.rows.push_back(build_report_row("train+augmented", g, both, test, opts));
  }
  return rep;
}

inline nlohmann::json to_json(const CoverageReport& c) {
  nlohmann::json j;
  j["side"] = c.side;
  j["avg_length"] = c.avg_length;
  nlohmann::json ng = nlohmann::json::object();
  for (auto [n, v] : c.ngram_coverage) ng[std::to_string(n)] = v;
  j["ngram_coverage"] = ng;
  j["instance_coverage"] = c.instance_coverage;
  if (c.structure_coverage) {
    j["structure_coverage"] = *c.structure_coverage;
    j["uncovered_structures"] = c.uncovered_structures;
    nlohmann::json dh = nlohmann::json::object();
    for (const auto& [target, buckets] : c.depth_histogram) {
      nlohmann::json b = nlohmann::json::object();
      for (auto [d, count] : buckets) b[std::to_string(d)] = count;
      dh[target] = b;
    }
    j["depth_histogram"] = dh;
    j["skipped_unparseable"] = c.skipped_unparseable;
  }
  return j;
}

inline CoverageReport coverage_from_json(const nlohmann::json& j) {
  CoverageReport c;
  c.side = j.at("side").get<std::string>();
  c.avg_length = j.at("avg_length").get<double>();
  for (const auto& [n, v] : j.at("ngram_coverage").items()) c.ngram_coverage[std::stoi(n)] = v.get<double>();
  c.instance_coverage = j.at("instance_coverage").get<double>();
  if (j.contains("structure_coverage")) {
    c.structure_coverage = j.at("structure_coverage").get<double>();
    c.uncovered_structures = j.at("uncovered_structures").get<std::vector<std::string>>();
    for (const auto& [target, buckets] : j.at("depth_histogram").items()) {
      for (const auto& [d, count] : buckets.items()) c.depth_histogram[target][std::stoi(d)] = count.get<std::size_t>();
    }
    c.skipped_unparseable = j.at("skipped_unparseable").get<std::size_t>();
  }
  return c;
}

inline nlohmann::json to_json(const DatasetReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"name", row.name},
                    {"instances", row.instances},
                    {"english", to_json(row.english)},
                    {"mr", to_json(row.mr)}});
  }
  return {{"rows", rows}};
}

inline DatasetReport report_from_json(const nlohmann::json& j) {
  DatasetReport r;
  for (const auto& row : j.at("rows")) {
    r.rows.push_back({row.at("name").get<std::string>(), row.at("instances").get<std::size_t>(),
                      coverage_from_json(row.at("english")), coverage_from_json(row.at("mr"))});
  }
  return r;
}

// Aligned text table: one line per row, English then MR columns.
inline std::string render_table(const DatasetReport& r, int ngram_order = 2) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-18s | %-28s | %-28s\n", "", "English", "Meaning representations");
  out += buf;
  std::string ng = std::to_string(ngram_order) + "-grams(%)";
  std::snprintf(buf, sizeof buf, "%-18s | %8s %10s %8s | %8s %10s %8s\n", "Dataset", "AvgLen", ng.c_str(), "Inst(%)",
                "AvgLen", ng.c_str(), "Inst(%)");
  out += buf;
  for (const auto& row : r.rows) {
    auto cov = [&](const CoverageReport& c) {
      auto it = c.ngram_coverage.find(ngram_order);
      return it == c.ngram_coverage.end() ? NAN : it->second;
    };
    std::snprintf(buf, sizeof buf, "%-18s | %8.1f %10.1f %8.1f | %8.1f %10.1f %8.1f\n", row.name.c_str(),
                  row.english.avg_length, cov(row.english), row.english.instance_coverage, row.mr.avg_length,
                  cov(row.mr), row.mr.instance_coverage);
    out += buf;
  }
  return out;
}

}  // namespace mrsynth
