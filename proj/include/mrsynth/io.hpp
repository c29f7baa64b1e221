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

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "mrsynth/error.hpp"

namespace mrsynth {

inline constexpr const char* kVersion = "0.1.0";

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes path.tmp next to path; commit() renames it into place. An
// uncommitted file is removed on destruction, so a failed run leaves no
// partial output.
class PendingFile {
 public:
  PendingFile(std::string path, std::string_view contents)
      : path_(std::move(path)), tmp_(path_ + ".tmp") {
    std::ofstream out(tmp_, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp_);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) throw DataError("failed writing " + tmp_);
  }
  PendingFile(PendingFile&& other) noexcept
      : path_(std::move(other.path_)), tmp_(std::move(other.tmp_)), committed_(other.committed_) {
    other.committed_ = true;
  }
  PendingFile(const PendingFile&) = delete;
  PendingFile& operator=(const PendingFile&) = delete;
  PendingFile& operator=(PendingFile&&) = delete;

  ~PendingFile() {
    if (!committed_) {
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  void commit() {
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw DataError("cannot rename " + tmp_ + " to " + path_ + ": " + ec.message());
    committed_ = true;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::string tmp_;
  bool committed_ = false;
};

inline void write_file_atomic(const std::string& path, std::string_view contents) {
  PendingFile f(path, contents);
  f.commit();
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace mrsynth
