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

// mrsynth: parse, estimate, sample, enumerate, analyze and augment
// meaning-representation corpora with a probabilistic CFG.

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mrsynth/mrsynth.hpp"

namespace {

using namespace mrsynth;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string log_level = "info";
};

// Writes to path atomically, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
  } else {
    write_file_atomic(path, contents);
  }
}

void log_estimation(const EstimationReport& rep) {
  spdlog::info("parsed {} of {} instances", rep.parsed, rep.instances);
  if (rep.skipped_unparseable > 0) spdlog::warn("skipped {} unparseable instances", rep.skipped_unparseable);
  if (rep.skipped_over_cap > 0) spdlog::warn("skipped {} instances over the tree cap", rep.skipped_over_cap);
  for (std::size_t i : rep.skipped_indices) spdlog::debug("skipped instance {}", i + 1);
  for (const auto& nt : rep.unobserved_nonterminals) {
    spdlog::warn("nonterminal {} never observed; using uniform weights", nt);
  }
}

nlohmann::json sample_record(const MRSample& s) {
  nlohmann::json depth = nlohmann::json::object();
  for (const auto& [nt, d] : s.depths) depth[nt] = d;
  return {{"mr", s.mr()}, {"logprob", s.logprob}, {"depth", depth}};
}

// --- parse -----------------------------------------------------------------

struct ParseOptions {
  std::string grammar, input, out;
  std::size_t cap = kDefaultTreeCap;
  bool all_trees = false;
};

int run_parse(const ParseOptions& o, const GlobalOptions& g) {
  auto wg = load_grammar_file(o.grammar);
  auto bg = binarize(wg.grammar());
  Corpus corpus = load_mr_corpus(o.input);
  std::vector<std::string> lines(corpus.size());
  std::size_t failed = 0;
  parallel_for(corpus.size(), g.jobs, [&](std::size_t i) {
    ParseForest f = parse_all(bg, corpus[i], o.cap);
    nlohmann::json j;
    j["mr"] = join(corpus[i]);
    j["count"] = f.tree_count();
    j["capped"] = f.capped();
    if (!f.unknown_tokens().empty()) j["unknown_tokens"] = f.unknown_tokens();
    if (f.parsed()) {
      if (o.all_trees && !f.capped()) {
        std::vector<std::string> trees;
        for (const auto& t : f.trees()) trees.push_back(tree_to_string(wg.grammar(), t));
        j["trees"] = trees;
      } else {
        j["tree"] = tree_to_string(wg.grammar(), *f.canonical_tree());
      }
    }
    lines[i] = j.dump() + "\n";
  });
  std::string out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out += lines[i];
    if (lines[i].find("\"count\":0") != std::string::npos) ++failed;
  }
  emit(o.out, out);
  spdlog::info("{} instances, {} unparseable", corpus.size(), failed);
  return 0;
}

// --- estimate --------------------------------------------------------------

struct EstimateOptions {
  std::string grammar, out, mode = "mle";
  std::vector<std::string> corpora;
  double smoothing = 0.0;
  std::size_t cap = kDefaultTreeCap;
};

int run_estimate(const EstimateOptions& o, const GlobalOptions& g) {
  auto wg = load_grammar_file(o.grammar);
  EstimationConfig cfg;
  cfg.mode = o.mode == "uniform" ? EstimationMode::kUniform : EstimationMode::kMle;
  cfg.smoothing = o.smoothing;
  cfg.tree_cap = o.cap;
  cfg.jobs = g.jobs;
  Corpus corpus;
  for (const auto& p : o.corpora) {
    auto c = load_mr_corpus(p);
    corpus.insert(corpus.end(), c.begin(), c.end());
  }
  if (cfg.mode == EstimationMode::kMle && corpus.empty()) throw UsageError("mle estimation needs --corpus");
  auto res = estimate(wg.grammar(), corpus, cfg);
  if (cfg.mode == EstimationMode::kMle) log_estimation(res.report);
  emit(o.out, store_grammar(res.grammar));
  return 0;
}

// --- sample ----------------------------------------------------------------

struct SampleOptions {
  std::string grammar, out;
  std::size_t count = 1;
  std::optional<std::uint64_t> seed;
  int max_depth = 50;
  std::size_t max_len = 512;
  std::optional<std::uint64_t> budget;
  std::vector<std::string> exclude, filters;
};

int run_sample(const SampleOptions& o, const GlobalOptions& g) {
  auto wg = load_grammar_file(o.grammar);
  for (const auto& d : validate(wg)) {
    if (d.severity == Severity::kWarning) spdlog::warn("{}", d.message);
  }
  SampleConfig cfg;
  cfg.count = o.count;
  cfg.seed = o.seed.value_or(g.seed);
  cfg.max_depth = o.max_depth;
  cfg.max_len = o.max_len;
  cfg.budget = o.budget;
  cfg.jobs = g.jobs;
  auto registry = FilterRegistry::with_builtins();
  for (const auto& spec : o.filters) cfg.filters.push_back(registry.make(spec));
  for (const auto& p : o.exclude) {
    for (const auto& t : load_mr_corpus(p)) cfg.exclude.insert(join(t));
  }
  auto res = sample_unique(wg, cfg);
  std::string out;
  for (const auto& s : res.samples) out += sample_record(s).dump() + "\n";
  emit(o.out, out);
  spdlog::info("{} attempts, {} unique samples", res.stats.attempts, res.stats.returned);
  for (const auto& [reason, n] : res.stats.rejected_by_reason) spdlog::info("rejected ({}): {}", reason, n);
  if (res.stats.budget_exhausted) {
    spdlog::warn("attempt budget exhausted with {} of {} samples{}", res.stats.returned, o.count,
                 res.stats.distinct_exhausted ? "; no new MRs in the last tenth of attempts (language exhausted)" : "");
  }
  return 0;
}

// --- enumerate -------------------------------------------------------------

struct EnumerateOptions {
  std::string grammar, out;
  std::optional<std::size_t> max_len;
};

int run_enumerate(const EnumerateOptions& o, const GlobalOptions&) {
  auto wg = load_grammar_file(o.grammar);
  auto res = enumerate_language(wg.grammar(), o.max_len);
  std::string out;
  for (const auto& s : res.strings) out += join(s) + "\n";
  emit(o.out, out);
  spdlog::info("language is {}; {} strings{}", res.finite ? "finite" : "infinite", res.strings.size(),
               o.max_len ? " up to length " + std::to_string(*o.max_len) : std::string());
  return 0;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeOptions {
  std::string grammar, train, test, augmented, out;
  std::vector<int> ngrams;
  std::vector<std::string> depth_targets;
  std::optional<std::string> weighted_grammar;
};

int run_analyze(const AnalyzeOptions& o, const GlobalOptions& g) {
  auto wg = load_grammar_file(o.grammar);
  ReportOptions opts;
  if (!o.ngrams.empty()) opts.ngram_orders = o.ngrams;
  opts.depth_targets = o.depth_targets;
  opts.jobs = g.jobs;
  auto train = load_dataset(o.train);
  auto test = load_dataset(o.test);
  std::optional<ParallelDataset> aug;
  if (!o.augmented.empty()) aug = load_dataset(o.augmented);
  auto rep = build_report(wg.grammar(), train, test, aug ? &*aug : nullptr, opts);
  nlohmann::json j = to_json(rep);
  if (o.weighted_grammar) {
    auto pg = load_grammar_file(*o.weighted_grammar);
    auto ppl = mr_perplexity(pg, test.mr_corpus(), g.jobs);
    j["test_perplexity"] = {{"total_logprob", ppl.total_logprob},
                            {"token_count", ppl.token_count},
                            {"perplexity", ppl.perplexity ? nlohmann::json(*ppl.perplexity) : nlohmann::json(nullptr)},
                            {"scored", ppl.scored},
                            {"unparseable", ppl.unparseable},
                            {"zero_probability", ppl.zero_probability}};
  }
  if (!o.out.empty()) write_file_atomic(o.out, j.dump(2) + "\n");
  std::cout << render_table(rep, opts.ngram_orders.front());
  return 0;
}

// --- augment ---------------------------------------------------------------

struct AugmentOptions {
  AugmentConfig cfg;
  std::string weights = "uniform", backtranslator = "echo", layout = "concat", format, replay;
  std::optional<std::uint64_t> seed;
  std::size_t batch_size = 32;
  int timeout_ms = 30000;
};

int run_augment(AugmentOptions o, const GlobalOptions& g) {
  AugmentConfig cfg;
  if (!o.replay.empty()) {
    cfg = config_from_manifest(nlohmann::json::parse(read_file(o.replay)), o.cfg.out_dir);
  } else {
    cfg = o.cfg;
    cfg.weights = parse_weight_source(o.weights);
    cfg.layout = parse_layout(o.layout);
    cfg.seed = o.seed.value_or(g.seed);
    cfg.backtranslator = BacktranslatorSpec::parse(o.backtranslator);
    cfg.backtranslator.batch_size = o.batch_size;
    cfg.backtranslator.timeout = std::chrono::milliseconds(o.timeout_ms);
    if (o.format == "tsv") cfg.format = DatasetFormat::kTsv;
    if (o.format == "jsonl") cfg.format = DatasetFormat::kJsonl;
  }
  cfg.jobs = g.jobs;
  cfg.backtranslator.max_in_flight = g.jobs;
  auto res = augment(cfg);
  for (const auto& p : res.written) spdlog::info("wrote {}", p);
  spdlog::info("{} of {} requested samples", res.manifest["returned"].get<std::size_t>(), cfg.count);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("mrsynth");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Sample, backtranslate and analyze meaning-representation corpora with PCFGs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", mrsynth::kVersion);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed");
  app.add_option("--jobs", global.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", global.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  ParseOptions parse_o;
  auto* parse = app.add_subcommand("parse", "Parse MRs and report tree counts");
  parse->add_option("--grammar", parse_o.grammar)->required();
  parse->add_option("--input", parse_o.input, "MR file (one per line, or .tsv/.jsonl dataset)")->required();
  parse->add_option("--cap", parse_o.cap, "Tree enumeration cap");
  parse->add_flag("--all-trees", parse_o.all_trees, "Print every tree instead of the canonical one");
  parse->add_option("--out", parse_o.out);

  EstimateOptions est_o;
  auto* est = app.add_subcommand("estimate", "Estimate rule weights");
  est->add_option("--grammar", est_o.grammar)->required();
  est->add_option("--corpus", est_o.corpora, "MR corpus files");
  est->add_option("--mode", est_o.mode)->check(CLI::IsMember({"mle", "uniform"}));
  est->add_option("--smoothing", est_o.smoothing, "Add-lambda smoothing")->check(CLI::NonNegativeNumber);
  est->add_option("--cap", est_o.cap, "Tree enumeration cap");
  est->add_option("--out", est_o.out);

  SampleOptions samp_o;
  auto* samp = app.add_subcommand("sample", "Sample unique MRs");
  samp->add_option("--grammar", samp_o.grammar)->required();
  samp->add_option("--count", samp_o.count)->required()->check(CLI::PositiveNumber);
  samp->add_option("--seed", samp_o.seed);
  samp->add_option("--max-depth", samp_o.max_depth)->check(CLI::PositiveNumber);
  samp->add_option("--max-len", samp_o.max_len)->check(CLI::PositiveNumber);
  samp->add_option("--budget", samp_o.budget, "Attempt budget (default 100 * count)");
  samp->add_option("--exclude", samp_o.exclude, "MR corpora whose MRs are never returned");
  samp->add_option("--filter", samp_o.filters, "Post-filter spec, e.g. must-contain(most)");
  samp->add_option("--out", samp_o.out);

  EnumerateOptions enum_o;
  auto* enu = app.add_subcommand("enumerate", "List every MR of the grammar's language");
  enu->add_option("--grammar", enum_o.grammar)->required();
  enu->add_option("--max-len", enum_o.max_len);
  enu->add_option("--out", enum_o.out);

  AnalyzeOptions an_o;
  auto* an = app.add_subcommand("analyze", "Coverage, length and depth statistics");
  an->add_option("--grammar", an_o.grammar)->required();
  an->add_option("--train", an_o.train)->required();
  an->add_option("--test", an_o.test)->required();
  an->add_option("--augmented", an_o.augmented);
  an->add_option("--ngram", an_o.ngrams)->check(CLI::PositiveNumber);
  an->add_option("--depth-target", an_o.depth_targets);
  an->add_option("--perplexity-grammar", an_o.weighted_grammar, "Weighted grammar scoring the test MRs");
  an->add_option("--out", an_o.out);

  AugmentOptions aug_o;
  auto* aug = app.add_subcommand("augment", "Sample, backtranslate and assemble an augmented dataset");
  aug->add_option("--grammar", aug_o.cfg.grammar_path);
  aug->add_option("--weights", aug_o.weights)->check(CLI::IsMember({"uniform", "mle", "file"}));
  aug->add_option("--corpus", aug_o.cfg.corpus_paths, "MR corpora for --weights mle");
  aug->add_option("--smoothing", aug_o.cfg.smoothing)->check(CLI::NonNegativeNumber);
  aug->add_option("--cap", aug_o.cfg.tree_cap);
  aug->add_option("--train", aug_o.cfg.train_path);
  aug->add_option("--count", aug_o.cfg.count)->check(CLI::PositiveNumber);
  aug->add_option("--seed", aug_o.seed);
  aug->add_option("--max-depth", aug_o.cfg.max_depth)->check(CLI::PositiveNumber);
  aug->add_option("--max-len", aug_o.cfg.max_len)->check(CLI::PositiveNumber);
  aug->add_option("--budget", aug_o.cfg.budget);
  aug->add_option("--filter", aug_o.cfg.filters);
  aug->add_option("--exclude", aug_o.cfg.exclude_paths);
  aug->add_option("--backtranslator", aug_o.backtranslator, "echo | table:FILE | http://HOST:PORT/PATH | cmd:COMMAND");
  aug->add_option("--batch-size", aug_o.batch_size)->check(CLI::PositiveNumber);
  aug->add_option("--timeout-ms", aug_o.timeout_ms)->check(CLI::PositiveNumber);
  aug->add_option("--layout", aug_o.layout)->check(CLI::IsMember({"concat", "pretrain"}));
  aug->add_option("--format", aug_o.format)->check(CLI::IsMember({"tsv", "jsonl"}));
  aug->add_option("--out-dir", aug_o.cfg.out_dir)->required();
  aug->add_option("--replay", aug_o.replay, "Re-run the configuration recorded in a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(global.log_level));

  try {
    if (*parse) return run_parse(parse_o, global);
    if (*est) return run_estimate(est_o, global);
    if (*samp) return run_sample(samp_o, global);
    if (*enu) return run_enumerate(enum_o, global);
    if (*an) return run_analyze(an_o, global);
    if (*aug) {
      if (aug_o.replay.empty() && (aug_o.cfg.grammar_path.empty() || aug_o.cfg.train_path.empty())) {
        throw UsageError("augment needs --grammar and --train (or --replay)");
      }
      return run_augment(aug_o, global);
    }
  } catch (const mrsynth::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 1;
}
