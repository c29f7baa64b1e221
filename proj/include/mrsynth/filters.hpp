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
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mrsynth/error.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

// A sampled meaning representation with its derivation.
struct MRSample {
  Tokens tokens;
  ParseTree derivation;
  double logprob = 0.0;                // sum of log rule weights
  std::map<std::string, int> depths;   // tree_depth per nonterminal in the tree

  std::string mr() const { return join(tokens); }
};

using SamplePredicate = std::function<bool(const MRSample&)>;

// A named post-filter; samples for which accept returns false are rejected.
struct PostFilter {
  std::string name;  // full spec, e.g. "must-contain(most)"
  SamplePredicate accept;
};

// Builds predicates from textual specs "name(arg, arg, ...)". Arguments may
// be single-quoted.
class FilterRegistry {
 public:
  using Factory = std::function<SamplePredicate(const std::vector<std::string>& args)>;

  static FilterRegistry with_builtins() {
    FilterRegistry reg;
    reg.register_filter("max-depth-of", [](const std::vector<std::string>& args) -> SamplePredicate {
      if (args.size() != 2) throw UsageError("max-depth-of takes (nonterminal, depth)");
      int limit = 0;
      try {
        limit = std::stoi(args[1]);
      } catch (const std::exception&) {
        throw UsageError("max-depth-of: bad depth '" + args[1] + "'");
      }
      return [nt = args[0], limit](const MRSample& s) {
        auto it = s.depths.find(nt);
        return it == s.depths.end() || it->second <= limit;
      };
    });
    reg.register_filter("must-contain", [](const std::vector<std::string>& args) -> SamplePredicate {
      if (args.size() != 1) throw UsageError("must-contain takes (token)");
      return [tok = args[0]](const MRSample& s) {
        return std::find(s.tokens.begin(), s.tokens.end(), tok) != s.tokens.end();
      };
    });
    reg.register_filter("forbid-adjacent", [](const std::vector<std::string>& args) -> SamplePredicate {
      if (args.size() != 2) throw UsageError("forbid-adjacent takes (token, token)");
      return [a = args[0], b = args[1]](const MRSample& s) {
        for (std::size_t i = 0; i + 1 < s.tokens.size(); ++i) {
          if (s.tokens[i] == a && s.tokens[i + 1] == b) return false;
        }
        return true;
      };
    });
    return reg;
  }

  void register_filter(const std::string& name, Factory factory) {
    if (!factories_.emplace(name, std::move(factory)).second) {
      throw UsageError("filter '" + name + "' is already registered");
    }
  }

  // Registers a filter that takes no arguments.
  void register_predicate(const std::string& name, SamplePredicate pred) {
    register_filter(name, [name, pred](const std::vector<std::string>& args) {
      if (!args.empty()) throw UsageError("filter " + name + " takes no arguments");
      return pred;
    });
  }

  bool contains(const std::string& name) const { return factories_.contains(name); }

  PostFilter make(std::string_view spec) const {
    std::string name;
    std::vector<std::string> args;
    auto open = spec.find('(');
    if (open == std::string_view::npos) {
      name = trim(spec);
    } else {
      if (spec.back() != ')') throw UsageError("malformed filter spec '" + std::string(spec) + "'");
      name = trim(spec.substr(0, open));
      std::string_view inner = spec.substr(open + 1, spec.size() - open - 2);
      if (!trim(inner).empty()) {
        std::size_t start = 0;
        for (;;) {
          auto comma = inner.find(',', start);
          std::string arg = trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start));
          if (arg.size() >= 2 && arg.front() == '\'' && arg.back() == '\'') arg = arg.substr(1, arg.size() - 2);
          args.push_back(arg);
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
      }
    }
    auto it = factories_.find(name);
    if (it == factories_.end()) throw UsageError("unknown filter '" + name + "'");
    return {std::string(spec), it->second(args)};
  }

 private:
  static std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return std::string(s.substr(b, e - b));
  }

  std::map<std::string, Factory> factories_;
};

}  // namespace mrsynth
