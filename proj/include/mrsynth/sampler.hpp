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
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "mrsynth/error.hpp"
#include "mrsynth/filters.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/parallel.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/random.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

struct SampleConfig {
  std::size_t count = 1;               // target number of unique MRs
  int max_depth = 50;                  // nodes on a root-to-leaf path
  std::size_t max_len = 512;           // tokens
  std::optional<std::uint64_t> budget; // attempts; defaults to 100 * count
  std::uint64_t seed = 0;
  std::unordered_set<std::string> exclude;  // space-joined MRs never returned
  std::vector<PostFilter> filters;
  int jobs = 1;

  std::uint64_t effective_budget() const { return budget.value_or(100 * static_cast<std::uint64_t>(count)); }

  void check() const {
    if (count < 1) throw UsageError("sample count must be at least 1");
    if (max_depth < 1) throw UsageError("max depth must be at least 1");
    if (max_len < 1) throw UsageError("max length must be at least 1");
    if (effective_budget() < count) throw UsageError("attempt budget must be at least the sample count");
  }
};

// Why a single draw was thrown away: "depth-cap", "length-cap" or
// "filter:<spec>".
struct Rejection {
  std::string reason;
};

using SampleOutcome = std::variant<MRSample, Rejection>;

// Top-down leftmost sampler. A draw that runs past the depth or length cap
// is rejected as a whole rather than truncated.
class Sampler {
 public:
  Sampler(const WeightedGrammar& wg, SampleConfig cfg) : wg_(wg), cfg_(std::move(cfg)) {
    const Grammar& g = wg_.grammar();
    choices_.resize(g.num_nonterminals());
    for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
      double cum = 0.0;
      for (RuleId r : g.rules_for(nt)) {
        double w = wg_.weight(r);
        if (w > 0.0) {
          cum += w;
          choices_[nt].push_back({r, cum});
        }
      }
    }
  }

  const SampleConfig& config() const { return cfg_; }
  const WeightedGrammar& grammar() const { return wg_; }

  SampleOutcome draw(Engine& rng) const {
    const Grammar& g = wg_.grammar();
    Ctx ctx{rng, {}, 1, 0.0, {}, std::vector<int>(g.num_nonterminals(), 0),
            std::vector<int>(g.num_nonterminals(), 0)};
    MRSample s;
    if (!expand(g.start(), 1, s.derivation, ctx)) return Rejection{ctx.reason};
    s.tokens = std::move(ctx.tokens);
    s.logprob = ctx.logprob;
    for (int nt = 0; nt < g.num_nonterminals(); ++nt) {
      if (ctx.most[nt] > 0) s.depths.emplace(g.nonterminal_name(nt), ctx.most[nt] - 1);
    }
    for (const auto& f : cfg_.filters) {
      if (!f.accept(s)) return Rejection{"filter:" + f.name};
    }
    return s;
  }

  // Draw number i of the run, on its own counter-derived stream.
  SampleOutcome attempt(std::uint64_t i) const {
    auto rng = attempt_engine(cfg_.seed, i);
    return draw(rng);
  }

 private:
  struct Choice {
    RuleId rule;
    double cumulative;
  };
  struct Ctx {
    Engine& rng;
    Tokens tokens;
    std::size_t pending;  // unexpanded symbols, each yields at least one token
    double logprob;
    std::string reason;
    std::vector<int> on_path;  // occurrences of each nonterminal above the current node
    std::vector<int> most;     // maximum of on_path seen so far
  };

  bool expand(int nt, int depth, ParseTree& node, Ctx& ctx) const {
    if (depth > cfg_.max_depth) {
      ctx.reason = "depth-cap";
      return false;
    }
    const auto& options = choices_[nt];
    if (options.empty()) {
      throw DataError("nonterminal " + wg_.grammar().nonterminal_name(nt) + " has no rule with positive weight");
    }
    const double u = unit_draw(ctx.rng) * options.back().cumulative;
    auto pick = std::upper_bound(options.begin(), options.end(), u,
                                 [](double v, const Choice& c) { return v < c.cumulative; });
    if (pick == options.end()) --pick;
    const Rule& rule = wg_.grammar().rule(pick->rule);
    node.rule = rule.id;
    ctx.logprob += std::log(wg_.weight(rule.id));
    ctx.pending += rule.rhs.size() - 1;
    if (ctx.tokens.size() + ctx.pending > cfg_.max_len) {
      ctx.reason = "length-cap";
      return false;
    }
    ctx.most[nt] = std::max(ctx.most[nt], ++ctx.on_path[nt]);
    for (SymbolRef s : rule.rhs) {
      if (s.terminal()) {
        ctx.tokens.push_back(wg_.grammar().terminal_name(s.index));
        --ctx.pending;
      } else {
        node.children.emplace_back();
        if (!expand(s.index, depth + 1, node.children.back(), ctx)) return false;
      }
    }
    --ctx.on_path[nt];
    return true;
  }

  const WeightedGrammar& wg_;
  SampleConfig cfg_;
  std::vector<std::vector<Choice>> choices_;
};

inline SampleOutcome sample_one(const WeightedGrammar& wg, const SampleConfig& cfg, Engine& rng) {
  return Sampler(wg, cfg).draw(rng);
}

struct SampleStats {
  std::uint64_t attempts = 0;
  std::uint64_t returned = 0;
  // depth-cap, length-cap, filter:<spec>, duplicate, excluded
  std::map<std::string, std::uint64_t> rejected_by_reason;
  bool budget_exhausted = false;
  // Budget ran out and the last tenth of the attempts found nothing new,
  // i.e. the reachable language is (nearly) used up.
  bool distinct_exhausted = false;
};

struct SampleResult {
  std::vector<MRSample> samples;
  SampleStats stats;
};

// Draws until cfg.count distinct MRs are collected or the attempt budget is
// spent. Attempts may run concurrently; they are consumed in attempt order,
// so the output depends only on the grammar and cfg, not on cfg.jobs.
inline SampleResult sample_unique(const WeightedGrammar& wg, const SampleConfig& cfg) {
  cfg.check();
  Sampler sampler(wg, cfg);
  const std::uint64_t budget = cfg.effective_budget();
  const std::uint64_t batch = std::max<std::uint64_t>(256, static_cast<std::uint64_t>(cfg.jobs) * 256);

  SampleResult res;
  std::unordered_set<std::string> seen;
  std::uint64_t last_new = 0;
  std::uint64_t next = 0;
  while (res.samples.size() < cfg.count && next < budget) {
    const std::uint64_t n = std::min(batch, budget - next);
    std::vector<std::optional<SampleOutcome>> outcomes(n);
    parallel_for(n, cfg.jobs, [&](std::size_t k) { outcomes[k] = sampler.attempt(next + k); });
    for (std::uint64_t k = 0; k < n && res.samples.size() < cfg.count; ++k) {
      ++res.stats.attempts;
      auto& out = *outcomes[k];
      if (auto* rej = std::get_if<Rejection>(&out)) {
        ++res.stats.rejected_by_reason[rej->reason];
        continue;
      }
      auto& s = std::get<MRSample>(out);
      std::string key = s.mr();
      if (cfg.exclude.contains(key)) {
        ++res.stats.rejected_by_reason["excluded"];
        continue;
      }
      if (!seen.insert(std::move(key)).second) {
        ++res.stats.rejected_by_reason["duplicate"];
        continue;
      }
      last_new = res.stats.attempts;
      res.samples.push_back(std::move(s));
    }
    next += n;
  }
  res.stats.returned = res.samples.size();
  res.stats.budget_exhausted = res.samples.size() < cfg.count;
  if (res.stats.budget_exhausted) {
    const std::uint64_t window = std::max<std::uint64_t>(1, budget / 10);
    res.stats.distinct_exhausted = res.stats.attempts - last_new >= window;
  }
  return res;
}

}  // namespace mrsynth
