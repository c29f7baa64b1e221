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

#include <string>
#include <string_view>
#include <vector>

#include "mrsynth/error.hpp"
#include "mrsynth/io.hpp"
#include "mrsynth/text.hpp"

namespace mrsynth {

enum class Origin { kOriginal, kSynthetic };

inline const char* to_string(Origin o) { return o == Origin::kOriginal ? "original" : "synthetic"; }

struct Record {
  std::string sentence;
  std::string mr;
  Origin origin = Origin::kOriginal;

  bool operator==(const Record&) const = default;
};

// (sentence, MR) pairs.
struct ParallelDataset {
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  Corpus mr_corpus() const {
    Corpus out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(tokenize(r.mr));
    return out;
  }
  Corpus sentence_corpus() const {
    Corpus out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(tokenize(r.sentence));
    return out;
  }

  bool operator==(const ParallelDataset&) const = default;
};

enum class DatasetFormat { kTsv, kJsonl };

inline DatasetFormat format_for_path(std::string_view path) {
  auto ends_with = [&](std::string_view suf) {
    return path.size() >= suf.size() && path.substr(path.size() - suf.size()) == suf;
  };
  return ends_with(".jsonl") || ends_with(".json") ? DatasetFormat::kJsonl : DatasetFormat::kTsv;
}

namespace detail {

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    fn(line, line_no);
    pos = eol + 1;
  }
}

inline bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

inline Origin parse_origin(std::string_view s, int line_no) {
  if (s == "original") return Origin::kOriginal;
  if (s == "synthetic") return Origin::kSynthetic;
  throw DataError("line " + std::to_string(line_no) + ": bad origin '" + std::string(s) + "'");
}

}  // namespace detail

// TSV: "sentence<TAB>mr" per line, optionally followed by a third
// "original"/"synthetic" origin field as written by serialize_dataset.
// JSONL: {"sentence": ..., "mr": ..., ["origin": ...]} per line. Blank lines
// are skipped.
inline ParallelDataset parse_dataset(std::string_view text, DatasetFormat format) {
  ParallelDataset ds;
  detail::for_each_line(text, [&](std::string_view line, int line_no) {
    if (detail::blank(line)) return;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    Record rec;
    if (format == DatasetFormat::kTsv) {
      std::vector<std::string_view> fields;
      std::size_t start = 0;
      for (;;) {
        auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
      }
      if (fields.size() == 3 && (fields[2] == "original" || fields[2] == "synthetic")) {
        rec.origin = detail::parse_origin(fields[2], line_no);
      } else if (fields.size() != 2) {
        throw DataError(where + "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
      }
      rec.sentence = std::string(fields[0]);
      rec.mr = std::string(fields[1]);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw DataError(where + "malformed JSON: " + e.what());
      }
      if (!j.is_object() || !j.contains("sentence") || !j.contains("mr") || !j["sentence"].is_string() ||
          !j["mr"].is_string()) {
        throw DataError(where + "expected an object with string fields \"sentence\" and \"mr\"");
      }
      rec.sentence = j["sentence"].get<std::string>();
      rec.mr = j["mr"].get<std::string>();
      if (j.contains("origin")) {
        if (!j["origin"].is_string()) throw DataError(where + "\"origin\" must be a string");
        rec.origin = detail::parse_origin(j["origin"].get<std::string>(), line_no);
      }
    }
    if (tokenize(rec.mr).empty()) throw DataError(where + "empty meaning representation");
    ds.records.push_back(std::move(rec));
  });
  return ds;
}

inline ParallelDataset load_dataset(const std::string& path) {
  return parse_dataset(read_file(path), format_for_path(path));
}

inline ParallelDataset load_dataset(const std::string& path, DatasetFormat format) {
  return parse_dataset(read_file(path), format);
}

inline std::string serialize_dataset(const ParallelDataset& ds, DatasetFormat format) {
  std::string out;
  for (const auto& r : ds.records) {
    if (r.sentence.empty() && r.origin == Origin::kSynthetic) {
      throw DataError("synthetic record without a sentence: " + r.mr);
    }
    if (format == DatasetFormat::kTsv) {
      if (r.sentence.find_first_of("\t\n") != std::string::npos || r.mr.find_first_of("\t\n") != std::string::npos) {
        throw DataError("record contains a tab or newline and cannot be written as TSV");
      }
      out += r.sentence + "\t" + r.mr + "\t" + to_string(r.origin) + "\n";
    } else {
      nlohmann::json j = {{"sentence", r.sentence}, {"mr", r.mr}, {"origin", to_string(r.origin)}};
      out += j.dump() + "\n";
    }
  }
  return out;
}

// MR corpus from a dataset (.tsv/.jsonl: the MR field) or from a plain file
// with one MR per line.
inline Corpus load_mr_corpus(const std::string& path) {
  auto has_suffix = [&](std::string_view suf) {
    return path.size() >= suf.size() && std::string_view(path).substr(path.size() - suf.size()) == suf;
  };
  if (has_suffix(".tsv") || has_suffix(".jsonl") || has_suffix(".json")) {
    return load_dataset(path).mr_corpus();
  }
  Corpus out;
  detail::for_each_line(read_file(path), [&](std::string_view line, int) {
    auto toks = tokenize(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  });
  return out;
}

}  // namespace mrsynth
