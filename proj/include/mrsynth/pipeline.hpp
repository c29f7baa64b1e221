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

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mrsynth/backtranslator.hpp"
#include "mrsynth/dataset.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/estimation.hpp"
#include "mrsynth/filters.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/io.hpp"
#include "mrsynth/random.hpp"
#include "mrsynth/sampler.hpp"

namespace mrsynth {

enum class Layout { kConcat, kPretrain };

inline const char* to_string(Layout l) { return l == Layout::kConcat ? "concat" : "pretrain"; }

inline Layout parse_layout(std::string_view s) {
  if (s == "concat") return Layout::kConcat;
  if (s == "pretrain") return Layout::kPretrain;
  throw UsageError("unknown layout '" + std::string(s) + "'");
}

// One emitted dataset and the file stem it is written under.
struct NamedDataset {
  std::string name;
  ParallelDataset data;
};

// Seeded Fisher-Yates; the same on every platform, unlike std::shuffle.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  Engine rng(splitmix64(seed ^ 0x53485546464c45ULL));
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// concat: one shuffled file holding both origins.
// pretrain: stage 1 synthetic only, stage 2 original only.
inline std::vector<NamedDataset> assemble(const ParallelDataset& original, const ParallelDataset& synthetic,
                                          Layout layout, std::uint64_t seed) {
  auto tagged = [](const ParallelDataset& ds, Origin o) {
    ParallelDataset out = ds;
    for (auto& r : out.records) r.origin = o;
    return out;
  };
  for (const auto& r : synthetic.records) {
    if (r.sentence.empty()) throw DataError("synthetic record not backtranslated: " + r.mr);
  }
  if (layout == Layout::kConcat) {
    ParallelDataset all = tagged(original, Origin::kOriginal);
    auto syn = tagged(synthetic, Origin::kSynthetic);
    all.records.insert(all.records.end(), syn.records.begin(), syn.records.end());
    seeded_shuffle(all.records, seed);
    return {{"concat", std::move(all)}};
  }
  return {{"pretrain_synthetic", tagged(synthetic, Origin::kSynthetic)},
          {"finetune_original", tagged(original, Origin::kOriginal)}};
}

enum class WeightSource { kUniform, kMleCorpus, kGrammarFile };

inline const char* to_string(WeightSource w) {
  switch (w) {
    case WeightSource::kUniform: return "uniform";
    case WeightSource::kMleCorpus: return "mle-corpus";
    case WeightSource::kGrammarFile: return "weighted-grammar-file";
  }
  return "uniform";
}

inline WeightSource parse_weight_source(std::string_view s) {
  if (s == "uniform") return WeightSource::kUniform;
  if (s == "mle" || s == "mle-corpus") return WeightSource::kMleCorpus;
  if (s == "file" || s == "weighted-grammar-file") return WeightSource::kGrammarFile;
  throw UsageError("unknown weight source '" + std::string(s) + "'");
}

struct AugmentConfig {
  std::string grammar_path;
  WeightSource weights = WeightSource::kUniform;
  std::vector<std::string> corpus_paths;  // for kMleCorpus
  double smoothing = 0.0;
  std::size_t tree_cap = kDefaultTreeCap;

  std::string train_path;
  std::size_t count = 1;
  int max_depth = 50;
  std::size_t max_len = 512;
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 0;
  std::vector<std::string> filters;        // filter specs
  std::vector<std::string> exclude_paths;  // MR corpora never to sample

  BacktranslatorSpec backtranslator;
  Layout layout = Layout::kConcat;
  std::string out_dir;
  std::optional<DatasetFormat> format;  // defaults to the train file's
  int jobs = 1;
};

struct AugmentResult {
  nlohmann::json manifest;
  std::vector<std::string> written;  // output paths, manifest last
  std::vector<MRSample> samples;
};

inline nlohmann::json manifest_for(const AugmentConfig& cfg, const std::string& grammar_sha, const SampleStats& stats,
                                   const EstimationReport& est, const std::vector<std::string>& outputs,
                                   DatasetFormat format) {
  nlohmann::json rejected = nlohmann::json::object();
  for (const auto& [reason, n] : stats.rejected_by_reason) rejected[reason] = n;
  nlohmann::json j;
  j["version"] = kVersion;
  j["grammar_path"] = cfg.grammar_path;
  j["grammar_sha256"] = grammar_sha;
  j["weights_mode"] = to_string(cfg.weights);
  j["corpus_paths"] = cfg.corpus_paths;
  j["smoothing"] = cfg.smoothing;
  j["tree_cap"] = cfg.tree_cap;
  j["train_path"] = cfg.train_path;
  j["seed"] = cfg.seed;
  j["requested"] = cfg.count;
  j["returned"] = stats.returned;
  j["attempts"] = stats.attempts;
  j["rejected_by_reason"] = rejected;
  j["budget_exhausted"] = stats.budget_exhausted;
  j["distinct_exhausted"] = stats.distinct_exhausted;
  j["skipped_unparseable"] = est.skipped_unparseable;
  j["skipped_over_cap"] = est.skipped_over_cap;
  j["unobserved_nonterminals"] = est.unobserved_nonterminals;
  j["sample"] = {{"max_depth", cfg.max_depth},
                 {"max_len", cfg.max_len},
                 {"budget", cfg.budget ? nlohmann::json(*cfg.budget) : nlohmann::json(nullptr)},
                 {"filters", cfg.filters},
                 {"exclude_paths", cfg.exclude_paths}};
  j["backtranslator"] = {{"spec", cfg.backtranslator.to_string()},
                         {"batch_size", cfg.backtranslator.batch_size},
                         {"timeout_ms", cfg.backtranslator.timeout.count()}};
  j["layout"] = to_string(cfg.layout);
  j["format"] = format == DatasetFormat::kTsv ? "tsv" : "jsonl";
  j["outputs"] = outputs;
  return j;
}

// Rebuilds the configuration of a recorded run. out_dir is not part of the
// manifest and must be supplied.
inline AugmentConfig config_from_manifest(const nlohmann::json& m, std::string out_dir) {
  AugmentConfig cfg;
  try {
    cfg.grammar_path = m.at("grammar_path").get<std::string>();
    cfg.weights = parse_weight_source(m.at("weights_mode").get<std::string>());
    cfg.corpus_paths = m.at("corpus_paths").get<std::vector<std::string>>();
    cfg.smoothing = m.at("smoothing").get<double>();
    cfg.tree_cap = m.at("tree_cap").get<std::size_t>();
    cfg.train_path = m.at("train_path").get<std::string>();
    cfg.seed = m.at("seed").get<std::uint64_t>();
    cfg.count = m.at("requested").get<std::size_t>();
    const auto& s = m.at("sample");
    cfg.max_depth = s.at("max_depth").get<int>();
    cfg.max_len = s.at("max_len").get<std::size_t>();
    if (!s.at("budget").is_null()) cfg.budget = s.at("budget").get<std::uint64_t>();
    cfg.filters = s.at("filters").get<std::vector<std::string>>();
    cfg.exclude_paths = s.at("exclude_paths").get<std::vector<std::string>>();
    const auto& bt = m.at("backtranslator");
    cfg.backtranslator = BacktranslatorSpec::parse(bt.at("spec").get<std::string>());
    cfg.backtranslator.batch_size = bt.at("batch_size").get<std::size_t>();
    cfg.backtranslator.timeout = std::chrono::milliseconds(bt.at("timeout_ms").get<std::int64_t>());
    cfg.layout = parse_layout(m.at("layout").get<std::string>());
    cfg.format = m.at("format").get<std::string>() == "tsv" ? DatasetFormat::kTsv : DatasetFormat::kJsonl;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed run manifest: ") + e.what());
  }
  if (m.value("grammar_sha256", "") != sha256_hex(read_file(cfg.grammar_path))) {
    throw DataError("grammar file " + cfg.grammar_path + " changed since the recorded run");
  }
  cfg.out_dir = std::move(out_dir);
  return cfg;
}

// sample -> backtranslate -> assemble -> write. Every output is staged as a
// temporary file and renamed into place only once all stages succeeded.
inline AugmentResult augment(const AugmentConfig& cfg,
                             const FilterRegistry& registry = FilterRegistry::with_builtins()) {
  if (cfg.out_dir.empty()) throw UsageError("augment needs an output directory");
  const std::string grammar_text = read_file(cfg.grammar_path);
  const WeightedGrammar file_grammar = load_grammar(grammar_text);
  const Grammar& g = file_grammar.grammar();

  WeightedGrammar weighted;
  EstimationReport est;
  switch (cfg.weights) {
    case WeightSource::kUniform:
      weighted = uniform_weights(g);
      break;
    case WeightSource::kGrammarFile:
      weighted = file_grammar;
      break;
    case WeightSource::kMleCorpus: {
      if (cfg.corpus_paths.empty()) throw UsageError("mle weights need at least one corpus file");
      Corpus corpus;
      for (const auto& p : cfg.corpus_paths) {
        auto c = load_mr_corpus(p);
        corpus.insert(corpus.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
      }
      EstimationConfig ec;
      ec.smoothing = cfg.smoothing;
      ec.tree_cap = cfg.tree_cap;
      ec.jobs = cfg.jobs;
      auto res = estimate_mle(g, corpus, ec);
      weighted = std::move(res.grammar);
      est = std::move(res.report);
      break;
    }
  }

  const ParallelDataset train = load_dataset(cfg.train_path);
  const DatasetFormat format = cfg.format.value_or(format_for_path(cfg.train_path));

  SampleConfig sc;
  sc.count = cfg.count;
  sc.max_depth = cfg.max_depth;
  sc.max_len = cfg.max_len;
  sc.budget = cfg.budget;
  sc.seed = cfg.seed;
  sc.jobs = cfg.jobs;
  for (const auto& spec : cfg.filters) sc.filters.push_back(registry.make(spec));
  for (const auto& p : cfg.exclude_paths) {
    for (const auto& toks : load_mr_corpus(p)) sc.exclude.insert(join(toks));
  }
  SampleResult sampled = sample_unique(weighted, sc);

  std::vector<std::string> mrs;
  mrs.reserve(sampled.samples.size());
  for (const auto& s : sampled.samples) mrs.push_back(s.mr());
  std::vector<std::string> sentences = Backtranslator(cfg.backtranslator).translate(mrs);

  ParallelDataset synthetic;
  for (std::size_t i = 0; i < mrs.size(); ++i) {
    if (tokenize(sentences[i]).empty()) {
      throw BacktranslatorError("backtranslator returned an empty sentence for '" + mrs[i] + "'");
    }
    synthetic.records.push_back({sentences[i], mrs[i], Origin::kSynthetic});
  }

  auto files = assemble(train, synthetic, cfg.layout, cfg.seed);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string ext = format == DatasetFormat::kTsv ? ".tsv" : ".jsonl";
  std::vector<PendingFile> pending;
  std::vector<std::string> names;
  for (const auto& f : files) {
    names.push_back(f.name + ext);
    pending.emplace_back((std::filesystem::path(cfg.out_dir) / (f.name + ext)).string(),
                         serialize_dataset(f.data, format));
  }
  AugmentResult result;
  result.manifest = manifest_for(cfg, sha256_hex(grammar_text), sampled.stats, est, names, format);
  pending.emplace_back((std::filesystem::path(cfg.out_dir) / "manifest.json").string(),
                       result.manifest.dump(2) + "\n");
  for (auto& p : pending) {
    p.commit();
    result.written.push_back(p.path());
  }
  result.samples = std::move(sampled.samples);
  return result;
}

}  // namespace mrsynth
