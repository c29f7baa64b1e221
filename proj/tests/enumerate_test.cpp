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

#include "mrsynth/enumerate.hpp"
#include "support/oracles.hpp"

namespace mrsynth {
namespace {

std::vector<std::string> joined(const LanguageEnumeration& e) {
  std::vector<std::string> out;
  for (const auto& s : e.strings) out.push_back(join(s));
  return out;
}

TEST(EnumerateLanguage, G1UpToFour) {
  auto g = load_grammar("S -> 'a' S\nS -> 'b'\n").grammar();
  auto e = enumerate_language(g, 4);
  EXPECT_FALSE(e.finite);
  EXPECT_EQ(joined(e), (std::vector<std::string>{"b", "a b", "a a b", "a a a b"}));
}

TEST(EnumerateLanguage, RecursiveWithoutBoundIsAnError) {
  auto g = load_grammar("S -> 'a' S\nS -> 'b'\n").grammar();
  EXPECT_THROW(enumerate_language(g), UsageError);
  EXPECT_FALSE(language_is_finite(g));
}

TEST(EnumerateLanguage, ScanIsFiniteAndMatchesBruteForce) {
  auto g = testing::bundled("scan.cfg").grammar();
  EXPECT_TRUE(language_is_finite(g));
  auto e = enumerate_language(g);
  EXPECT_TRUE(e.finite);
  EXPECT_EQ(e.strings.size(), 9228u);
  auto oracle = testing::brute_force_language(g);
  ASSERT_EQ(oracle.size(), e.strings.size());
  for (const auto& s : e.strings) EXPECT_TRUE(oracle.contains(s)) << join(s);
}

TEST(EnumerateLanguage, LengthThenLexicographicOrder) {
  auto g = load_grammar("S -> 'b' 'a'\nS -> 'a'\nS -> 'a' 'b'\nS -> 'c'\nS -> 'a' 'b'\n").grammar();
  auto e = enumerate_language(g);
  EXPECT_TRUE(e.finite);
  EXPECT_EQ(joined(e), (std::vector<std::string>{"a", "c", "a b", "b a"}));
}

TEST(EnumerateLanguage, UselessRecursionDoesNotMakeLanguageInfinite) {
  // The cycle runs through a nonproductive and an unreachable nonterminal.
  auto h = load_grammar("S -> 'a'\nS -> 'b' D\nD -> 'x' D\nU -> 'y' U\nU -> 'u'\n").grammar();
  EXPECT_TRUE(language_is_finite(h));
  EXPECT_EQ(joined(enumerate_language(h)), std::vector<std::string>{"a"});
}

TEST(EnumerateLanguage, AgreesWithBruteForceOnRecursiveGrammars) {
  for (const char* name : {"g1.cfg", "g2.cfg", "arith.cfg", "geoquery.cfg", "recursion_cp.cfg"}) {
    auto g = testing::bundled(name).grammar();
    for (std::size_t max_len : {1u, 3u, 7u}) {
      auto e = enumerate_language(g, max_len);
      auto oracle = testing::brute_force_language(g, max_len);
      ASSERT_EQ(e.strings.size(), oracle.size()) << name << " " << max_len;
      for (const auto& s : e.strings) ASSERT_TRUE(oracle.contains(s));
      for (std::size_t i = 1; i < e.strings.size(); ++i) {
        const auto& a = e.strings[i - 1];
        const auto& b = e.strings[i];
        ASSERT_TRUE(a.size() < b.size() || (a.size() == b.size() && a < b));
      }
    }
  }
}

TEST(EnumerateLanguage, BoundOnFiniteLanguage) {
  auto g = testing::bundled("scan.cfg").grammar();
  auto e = enumerate_language(g, 2);
  EXPECT_TRUE(e.finite);
  for (const auto& s : e.strings) EXPECT_LE(s.size(), 2u);
  EXPECT_EQ(e.strings.size(), testing::brute_force_language(g, 2).size());
}

}  // namespace
}  // namespace mrsynth
