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

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "mrsynth/grammar.hpp"
#include "support/oracles.hpp"

namespace mrsynth {
namespace {

// The GeoQuery fragment refers to Place and State without giving
// their rules; they stay opaque tokens here.
constexpr const char* kGeoFragment = R"(
S -> 'answer' '(' Var ')'
Var -> City
Var -> 'Place'
Var -> 'State'
City -> CityNonterm
City -> CityTerm
CityNonterm -> 'city' '(' City ')'
CityNonterm -> 'loc_2' '(' 'State' ')'
CityTerm -> 'city' '(' 'all' ')'
CityTerm -> 'capital' '(' 'all' ')'
)";

constexpr const char* kScanFragment = R"(
S -> Command
Command -> Walk_command
Walk_command -> Walk_actions
Walk_actions -> LWalk
LWalk -> Turn_left Walk
Turn_left -> 'i_turn_left'
Walk -> 'i_walk'
)";

int error_line(const std::string& text) {
  try {
    load_grammar(text);
  } catch (const GrammarError& e) {
    return e.line();
  }
  return -1;
}

TEST(LoadGrammar, MissingWeightsAreUniform) {
  auto wg = load_grammar("S -> 'a' S\nS -> 'b'\n");
  ASSERT_EQ(wg.grammar().num_rules(), 2u);
  EXPECT_DOUBLE_EQ(wg.weight(0), 0.5);
  EXPECT_DOUBLE_EQ(wg.weight(1), 0.5);
  EXPECT_EQ(wg.grammar().nonterminal_name(wg.grammar().start()), "S");
}

TEST(LoadGrammar, GeoQueryFragment) {
  auto wg = load_grammar(kGeoFragment);
  const Grammar& g = wg.grammar();
  EXPECT_EQ(g.num_rules(), 10u);
  EXPECT_EQ(g.nonterminal_name(g.start()), "S");
  EXPECT_FALSE(has_errors(validate(wg)));
}

TEST(LoadGrammar, FragmentWithUndefinedNonterminalsIsRejected) {
  std::string verbatim = R"(
S -> 'answer' '(' Var ')'
Var -> City
Var -> Place
City -> 'x'
)";
  EXPECT_EQ(error_line(verbatim), 4);
}

TEST(LoadGrammar, NegativeWeight) {
  EXPECT_THROW(load_grammar("S -> 'a' @ -1\n"), GrammarError);
  EXPECT_EQ(error_line("# header\nS -> 'a' @ -1\n"), 2);
}

TEST(LoadGrammar, SyntaxErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("S -> 'a'\nS 'b'\n"), 2);
  EXPECT_EQ(error_line("%start S\n%start S\nS -> 'a'\n"), 2);
  EXPECT_EQ(error_line("S -> 'a\n"), 1);
  EXPECT_EQ(error_line("S -> 'a' @ x\n"), 1);
  EXPECT_EQ(error_line("S -> 'a' @ 1 2\n"), 1);
  EXPECT_EQ(error_line("S ->\n"), 1);
  EXPECT_EQ(error_line("S -> 'a'\n\n\nS -> T\n"), 4);
  EXPECT_EQ(error_line("%weird\n"), 1);
  EXPECT_THROW(load_grammar("%start T\nS -> 'a'\n"), GrammarError);
  EXPECT_THROW(load_grammar("# nothing\n"), GrammarError);
}

TEST(LoadGrammar, ExplicitWeightsAreNormalized) {
  auto wg = load_grammar("S -> 'a' @ 2\nS -> 'b' @ 6\nT -> 'c' @ 0.25\n%start T\n");
  EXPECT_DOUBLE_EQ(wg.weight(0), 0.25);
  EXPECT_DOUBLE_EQ(wg.weight(1), 0.75);
  EXPECT_DOUBLE_EQ(wg.weight(2), 1.0);
  EXPECT_EQ(wg.grammar().nonterminal_name(wg.grammar().start()), "T");
}

TEST(LoadGrammar, MissingWeightCountsAsOne) {
  auto wg = load_grammar("S -> 'a' @ 3\nS -> 'b'\n");
  EXPECT_DOUBLE_EQ(wg.weight(0), 0.75);
  EXPECT_DOUBLE_EQ(wg.weight(1), 0.25);
}

TEST(LoadGrammar, ZeroWeightsAllowedButNotAllZero) {
  auto wg = load_grammar("S -> 'a' @ 0\nS -> 'b' @ 1\n");
  EXPECT_EQ(wg.weight(0), 0.0);
  EXPECT_THROW(load_grammar("S -> 'a' @ 0\nS -> 'b' @ 0\n"), GrammarError);
}

TEST(LoadGrammar, CommentsAndQuoting) {
  auto wg = load_grammar("# c\n  S -> 'it\\'s' '#' T  # trailing\nT -> '@' @ 1\n");
  const Grammar& g = wg.grammar();
  ASSERT_EQ(g.num_rules(), 2u);
  EXPECT_TRUE(g.find_terminal("it's"));
  EXPECT_TRUE(g.find_terminal("#"));
  EXPECT_TRUE(g.find_terminal("@"));
  EXPECT_EQ(g.describe(0), "S -> 'it\\'s' '#' T");
}

TEST(Validate, NonproductiveNonterminal) {
  auto wg = load_grammar("S -> S\n");
  auto diags = validate(wg);
  bool found = false;
  for (const auto& d : diags) found |= d.code == "nonproductive" && d.message.find("S ") == 0;
  EXPECT_TRUE(found);
}

TEST(Validate, ScanFragmentIsClean) {
  auto diags = validate(load_grammar(kScanFragment));
  EXPECT_TRUE(diags.empty());
}

TEST(Validate, RenormalizedWeightsPass) {
  auto wg = load_grammar("S -> 'a' @ 0.4\nS -> 'b' @ 0.5\n");
  EXPECT_TRUE(validate(wg).empty());
  EXPECT_NEAR(wg.weight(0) + wg.weight(1), 1.0, 1e-12);
}

TEST(Validate, ReportsBrokenWeightsAndStructure) {
  auto g = load_grammar("S -> 'a'\nS -> 'b'\nU -> 'c'\n").grammar();
  auto diags = validate(WeightedGrammar(g, {0.5, 0.4, 1.5}));
  std::set<std::string> codes;
  for (const auto& d : diags) codes.insert(d.code);
  EXPECT_TRUE(codes.contains("weight-sum"));
  EXPECT_TRUE(codes.contains("weight-range"));
  EXPECT_TRUE(codes.contains("unreachable"));
  EXPECT_TRUE(has_errors(diags));

  auto cyc = validate(load_grammar("S -> A\nA -> S\nA -> 'a'\n"));
  EXPECT_TRUE(has_errors(cyc));
}

TEST(Validate, BundledGrammarsHaveNoErrors) {
  for (const char* name : {"g1.cfg", "g2.cfg", "arith.cfg", "geoquery.cfg", "scan.cfg", "cfq_fragment.cfg",
                           "recursion_pp.cfg", "recursion_cp.cfg"}) {
    auto diags = validate(testing::bundled(name));
    EXPECT_FALSE(has_errors(diags)) << name;
  }
}

// Random grammar over a handful of symbols: every nonterminal gets at least
// one terminal rule so all are productive.
std::string random_grammar_text(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_nt(1, 5), n_rules(1, 4), len(1, 5), coin(0, 2);
  std::uniform_real_distribution<double> w(0.0, 10.0);
  const int nts = n_nt(rng);
  std::string out;
  if (coin(rng) == 0) out += "%start N" + std::to_string(nts - 1) + "\n";
  for (int a = 0; a < nts; ++a) {
    out += "N" + std::to_string(a) + " -> 't" + std::to_string(a) + "' @ " + std::to_string(w(rng) + 0.01) + "\n";
    for (int r = n_rules(rng); r > 1; --r) {
      out += "N" + std::to_string(a) + " ->";
      for (int k = len(rng); k > 0; --k) {
        int s = std::uniform_int_distribution<int>(0, nts - 1)(rng);
        out += coin(rng) == 0 ? " 'x\\'y" + std::to_string(s) + "'" : " N" + std::to_string(s);
      }
      if (coin(rng) != 0) out += " @ " + std::to_string(w(rng));
      out += "\n";
    }
  }
  return out;
}

TEST(StoreGrammar, RoundTripProperty) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto original = load_grammar(random_grammar_text(rng));
    std::string text = store_grammar(original);
    auto reloaded = load_grammar(text);
    ASSERT_EQ(reloaded.grammar(), original.grammar()) << text;
    ASSERT_EQ(store_grammar(reloaded), text);
    for (std::size_t r = 0; r < original.grammar().num_rules(); ++r) {
      ASSERT_NEAR(reloaded.weight(r), original.weight(r), 1e-11);
    }
    auto diags = validate(reloaded);
    for (const auto& d : diags) ASSERT_NE(d.code, "weight-sum");
  }
}

TEST(StoreGrammar, Format) {
  auto wg = load_grammar("S -> 'a' S @ 1\nS -> 'b' @ 2\n");
  EXPECT_EQ(store_grammar(wg), "%start S\nS -> 'a' S @ 0.333333333333\nS -> 'b' @ 0.666666666667\n");
}

TEST(Grammar, RuleIdsAreDense) {
  auto g = testing::bundled("geoquery.cfg").grammar();
  for (std::size_t i = 0; i < g.num_rules(); ++i) EXPECT_EQ(g.rule(static_cast<RuleId>(i)).id, static_cast<RuleId>(i));
}

}  // namespace
}  // namespace mrsynth
