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

#include <filesystem>
#include <fstream>

#include "mrsynth/dataset.hpp"
#include "mrsynth/io.hpp"

namespace mrsynth {
namespace {

std::string data_error(std::string_view text, DatasetFormat f) {
  try {
    parse_dataset(text, f);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseDataset, TsvRecord) {
  auto ds = parse_dataset("jump twice\tJUMP JUMP\n", DatasetFormat::kTsv);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.records[0], (Record{"jump twice", "JUMP JUMP", Origin::kOriginal}));
  EXPECT_EQ(ds.mr_corpus(), (Corpus{{"JUMP", "JUMP"}}));
  EXPECT_EQ(ds.sentence_corpus(), (Corpus{{"jump", "twice"}}));
}

TEST(ParseDataset, EmptyInput) {
  EXPECT_TRUE(parse_dataset("", DatasetFormat::kTsv).empty());
  EXPECT_TRUE(parse_dataset("\n  \n", DatasetFormat::kJsonl).empty());
}

TEST(ParseDataset, ErrorsNameTheLine) {
  EXPECT_EQ(data_error("a\tb\nx\ty\tz\n", DatasetFormat::kTsv), "line 2: expected 2 tab-separated fields, got 3");
  EXPECT_EQ(data_error("only one\n", DatasetFormat::kTsv), "line 1: expected 2 tab-separated fields, got 1");
  EXPECT_EQ(data_error("a\t \n", DatasetFormat::kTsv), "line 1: empty meaning representation");
  EXPECT_NE(data_error("{\"sentence\": \"a\"}\n", DatasetFormat::kJsonl).find("line 1"), std::string::npos);
  EXPECT_NE(data_error("\n{\"sentence\": 1, \"mr\": \"x\"}\n", DatasetFormat::kJsonl).find("line 2"), std::string::npos);
  EXPECT_NE(data_error("not json\n", DatasetFormat::kJsonl).find("malformed JSON"), std::string::npos);
  EXPECT_NE(data_error("{\"sentence\": \"a\", \"mr\": \"b\", \"origin\": \"made up\"}\n", DatasetFormat::kJsonl)
                .find("bad origin"),
            std::string::npos);
}

TEST(ParseDataset, JsonlAndOrigin) {
  auto ds = parse_dataset(
      "{\"sentence\": \"walk\", \"mr\": \"I_WALK\"}\r\n{\"sentence\": \"run\", \"mr\": \"I_RUN\", \"origin\": "
      "\"synthetic\"}\n",
      DatasetFormat::kJsonl);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.records[0].origin, Origin::kOriginal);
  EXPECT_EQ(ds.records[1].origin, Origin::kSynthetic);
  EXPECT_EQ(ds.records[1].mr, "I_RUN");
}

TEST(SerializeDataset, RoundTripsBothFormats) {
  ParallelDataset ds{{{"jump twice", "JUMP JUMP", Origin::kOriginal}, {"say \"hi\"", "SAY ( hi )", Origin::kSynthetic}}};
  for (auto f : {DatasetFormat::kTsv, DatasetFormat::kJsonl}) {
    EXPECT_EQ(parse_dataset(serialize_dataset(ds, f), f), ds);
  }
  EXPECT_EQ(serialize_dataset(ds, DatasetFormat::kTsv),
            "jump twice\tJUMP JUMP\toriginal\nsay \"hi\"\tSAY ( hi )\tsynthetic\n");
}

TEST(SerializeDataset, RefusesUntranslatedSynthetic) {
  ParallelDataset ds{{{"", "X", Origin::kSynthetic}}};
  EXPECT_THROW(serialize_dataset(ds, DatasetFormat::kJsonl), DataError);
  ParallelDataset tab{{{"a\tb", "X", Origin::kOriginal}}};
  EXPECT_THROW(serialize_dataset(tab, DatasetFormat::kTsv), DataError);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("mrsynth_dataset_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::filesystem::path dir_;
};

using DatasetFiles = TempDir;

TEST_F(DatasetFiles, FormatFollowsExtension) {
  write_file_atomic(path("d.jsonl"), "{\"sentence\": \"a\", \"mr\": \"A\"}\n");
  write_file_atomic(path("d.tsv"), "a\tA\n");
  write_file_atomic(path("mrs.txt"), "A B\n\n  C  \n");
  EXPECT_EQ(load_dataset(path("d.jsonl")), load_dataset(path("d.tsv")));
  EXPECT_EQ(load_mr_corpus(path("d.jsonl")), (Corpus{{"A"}}));
  EXPECT_EQ(load_mr_corpus(path("mrs.txt")), (Corpus{{"A", "B"}, {"C"}}));
  EXPECT_THROW(load_dataset(path("missing.tsv")), DataError);
}

TEST_F(DatasetFiles, AtomicWriteLeavesNothingOnAbort) {
  { PendingFile pf(path("out.tsv"), "partial"); }
  EXPECT_FALSE(std::filesystem::exists(path("out.tsv")));
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir_), std::filesystem::directory_iterator()), 0);
  write_file_atomic(path("out.tsv"), "x\ty\n");
  EXPECT_EQ(read_file(path("out.tsv")), "x\ty\n");
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

}  // namespace
}  // namespace mrsynth
