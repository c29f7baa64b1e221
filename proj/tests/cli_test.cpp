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


// Drives the installed binary end to end: exit codes and output formats.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "mrsynth/grammar.hpp"
#include "mrsynth/io.hpp"
#include "support/oracles.hpp"

namespace mrsynth {
namespace {

using testing::data_path;
using testing::grammar_path;

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("mrsynth_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Invocation run(const std::string& args) const {
    Invocation r;
    std::string cmd = std::string("'") + MRSYNTH_CLI + "' " + args + " 2>'" + path("stderr.txt") + "'";
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) return r;
    char buf[4096];
    for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_file(path("stderr.txt"));
    return r;
  }

  std::filesystem::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("sample --grammar " + grammar_path("g1.cfg")).code, 1);  // --count missing
  EXPECT_EQ(run("sample --grammar " + grammar_path("g1.cfg") + " --count 0").code, 1);
  EXPECT_EQ(run("augment --out-dir " + path("o") + " --layout mixed").code, 1);
  EXPECT_EQ(run("augment --out-dir " + path("o")).code, 1);
  EXPECT_EQ(run("estimate --grammar " + grammar_path("g2.cfg")).code, 1);  // mle without corpus
  auto bad_filter = run("sample --grammar " + grammar_path("g1.cfg") + " --count 1 --filter 'nope(x)'");
  EXPECT_EQ(bad_filter.code, 1);
  EXPECT_NE(bad_filter.err.find("nope"), std::string::npos);
}

TEST_F(Cli, HelpAndVersion) {
  auto h = run("--help");
  EXPECT_EQ(h.code, 0);
  for (const char* sub : {"parse", "estimate", "sample", "enumerate", "analyze", "augment"}) {
    EXPECT_NE(h.out.find(sub), std::string::npos) << sub;
  }
  auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(kVersion) + "\n");
}

TEST_F(Cli, DataErrors) {
  EXPECT_EQ(run("enumerate --grammar " + path("missing.cfg")).code, 2);
  write_file_atomic(path("bad.cfg"), "S -> 'a'\nS => 'b'\n");
  auto r = run("enumerate --grammar " + path("bad.cfg"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  write_file_atomic(path("broken.tsv"), "only one field\n");
  EXPECT_EQ(run("parse --grammar " + grammar_path("geoquery.cfg") + " --input " + path("broken.tsv")).code, 2);
}

TEST_F(Cli, Enumerate) {
  auto r = run("enumerate --grammar " + grammar_path("g1.cfg") + " --max-len 4");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines_of(r.out), (std::vector<std::string>{"b", "a b", "a a b", "a a a b"}));
  EXPECT_EQ(run("enumerate --grammar " + grammar_path("g1.cfg")).code, 1);
  auto scan = run("enumerate --grammar " + grammar_path("scan.cfg") + " --out " + path("scan.txt"));
  EXPECT_EQ(scan.code, 0);
  EXPECT_TRUE(scan.out.empty());
  EXPECT_EQ(lines_of(read_file(path("scan.txt"))).size(), 9228u);
}

TEST_F(Cli, Parse) {
  write_file_atomic(path("mrs.txt"), "x x x\nx y\n");
  auto r = run("parse --grammar " + grammar_path("g2.cfg") + " --input " + path("mrs.txt") + " --all-trees");
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines_of(r.out);
  ASSERT_EQ(ls.size(), 2u);
  auto a = nlohmann::json::parse(ls[0]);
  EXPECT_EQ(a["mr"], "x x x");
  EXPECT_EQ(a["count"], 2);
  EXPECT_EQ(a["capped"], false);
  EXPECT_EQ(a["trees"].size(), 2u);
  auto b = nlohmann::json::parse(ls[1]);
  EXPECT_EQ(b["count"], 0);
  EXPECT_EQ(b["unknown_tokens"], nlohmann::json::array({"y"}));
  EXPECT_FALSE(b.contains("tree"));

  write_file_atomic(path("long.txt"), "x x x x x x x x x x\n");
  auto c = nlohmann::json::parse(run("parse --grammar " + grammar_path("g2.cfg") + " --input " +
                                     path("long.txt") + " --cap 100").out);
  EXPECT_EQ(c["capped"], true);
  EXPECT_EQ(c["count"], 100);
}

TEST_F(Cli, Estimate) {
  write_file_atomic(path("corpus.txt"), "x x x\n");
  auto r = run("estimate --grammar " + grammar_path("g2.cfg") + " --corpus " + path("corpus.txt") + " --out " +
               path("w.cfg"));
  ASSERT_EQ(r.code, 0) << r.err;
  auto wg = load_grammar_file(path("w.cfg"));
  const auto& g = wg.grammar();
  for (int i = 0; i < g.num_rules(); ++i) {
    double expect = g.rule(i).rhs.size() == 2 ? 0.4 : 0.6;
    EXPECT_NEAR(wg.weight(i), expect, 1e-9) << i;
  }
  auto u = run("estimate --grammar " + grammar_path("g2.cfg") + " --mode uniform");
  ASSERT_EQ(u.code, 0);
  auto uw = load_grammar(u.out);
  EXPECT_NEAR(uw.weight(0), 0.5, 1e-12);
}

TEST_F(Cli, SampleIsDeterministic) {
  const std::string base = "sample --grammar " + grammar_path("g1.cfg") + " --count 6 --seed 9";
  auto a = run(base);
  auto b = run("--jobs 3 " + base);
  auto c = run("--seed 9 sample --grammar " + grammar_path("g1.cfg") + " --count 6");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  auto ls = lines_of(a.out);
  ASSERT_EQ(ls.size(), 6u);
  std::set<std::string> seen;
  for (const auto& l : ls) {
    auto j = nlohmann::json::parse(l);
    EXPECT_TRUE(seen.insert(j["mr"].get<std::string>()).second);
    EXPECT_LE(j["logprob"].get<double>(), 0.0);
    EXPECT_TRUE(j["depth"].contains("S"));
  }
}

TEST_F(Cli, SampleReportsExhaustion) {
  auto r = run("sample --grammar " + grammar_path("g1.cfg") + " --count 20 --max-len 3 --budget 2000");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines_of(r.out).size(), 3u);
  EXPECT_NE(r.err.find("budget exhausted"), std::string::npos) << r.err;
}

TEST_F(Cli, Analyze) {
  auto r = run("analyze --grammar " + grammar_path("geoquery.cfg") + " --train " + data_path("toy_train.tsv") +
               " --test " + data_path("toy_test.tsv") + " --augmented " + data_path("toy_augmented.tsv") +
               " --perplexity-grammar " + grammar_path("geoquery.cfg") + " --out " + path("report.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("train+augmented"), std::string::npos) << r.out;
  auto j = nlohmann::json::parse(read_file(path("report.json")));
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["instances"], 10);
  EXPECT_EQ(j["rows"][1]["instances"], 15);
  EXPECT_EQ(j["test_perplexity"]["scored"], 5);
}

TEST_F(Cli, AugmentAndReplay) {
  write_file_atomic(path("train.tsv"), "a b\ta b\n");
  const std::string base = "augment --grammar " + grammar_path("g1.cfg") + " --train " + path("train.tsv") +
                           " --count 4 --seed 2 --out-dir ";
  auto r = run(base + path("one"));
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run(base + path("two")).code, 0);
  EXPECT_EQ(read_file(path("one/concat.tsv")), read_file(path("two/concat.tsv")));
  EXPECT_EQ(lines_of(read_file(path("one/concat.tsv"))).size(), 5u);

  ASSERT_EQ(run("augment --replay " + path("one/manifest.json") + " --out-dir " + path("three")).code, 0);
  EXPECT_EQ(read_file(path("one/concat.tsv")), read_file(path("three/concat.tsv")));
  EXPECT_EQ(read_file(path("one/manifest.json")), read_file(path("three/manifest.json")));

  auto p = run(base + path("pre") + " --layout pretrain --format jsonl");
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(std::filesystem::exists(path("pre/pretrain_synthetic.jsonl")));
  EXPECT_TRUE(std::filesystem::exists(path("pre/finetune_original.jsonl")));
}

TEST_F(Cli, BacktranslatorFailuresExitThree) {
  write_file_atomic(path("train.tsv"), "a b\ta b\n");
  const std::string base = "augment --grammar " + grammar_path("g1.cfg") + " --train " + path("train.tsv") +
                           " --count 2 --out-dir " + path("out");
  EXPECT_EQ(run(base + " --backtranslator table:" + path("missing.tsv")).code, 3);
  EXPECT_EQ(run(base + " --backtranslator 'cmd:exit 4'").code, 3);
  EXPECT_EQ(run(base + " --backtranslator http://127.0.0.1:1/translate --timeout-ms 500").code, 3);
  EXPECT_FALSE(std::filesystem::exists(path("out/manifest.json")));
}

}  // namespace
}  // namespace mrsynth
