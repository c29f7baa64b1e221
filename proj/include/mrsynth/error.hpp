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

#include <stdexcept>
#include <string>

namespace mrsynth {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kUsage,           // bad flags or arguments
  kData,            // malformed grammar, corpus or dataset
  kBacktranslator,  // backtranslation endpoint failed; retriable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Grammar file problems. line() is 1-based, 0 when not tied to a line.
class GrammarError : public DataError {
 public:
  GrammarError(const std::string& what, int line = 0)
      : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

class BacktranslatorError : public Error {
 public:
  explicit BacktranslatorError(const std::string& what)
      : Error(ErrorKind::kBacktranslator, what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return 1;
    case ErrorKind::kData: return 2;
    case ErrorKind::kBacktranslator: return 3;
  }
  return 2;
}

}  // namespace mrsynth
