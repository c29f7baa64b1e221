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

#include <httplib.h>
#include <json.hpp>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mrsynth/dataset.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/parallel.hpp"

namespace mrsynth {

// Where synthetic sentences come from. Spec strings:
//   echo                 sentence = MR (test stub)
//   table:PATH           look the MR up in a dataset file (TSV or JSONL)
//   http://HOST:PORT/P   POST {"mrs": [...]}, expect {"sentences": [...]}
//   cmd:COMMAND          run COMMAND under /bin/sh; one {"mr": ...} JSON line
//                        per MR on stdin, one {"sentence": ...} line back
struct BacktranslatorSpec {
  enum class Kind { kEcho, kTable, kHttp, kCommand };

  Kind kind = Kind::kEcho;
  std::string target;  // path, URL or command line
  std::size_t batch_size = 32;
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 1;

  static BacktranslatorSpec parse(std::string_view spec) {
    BacktranslatorSpec s;
    if (spec == "echo" || spec == "echo-stub") {
      s.kind = Kind::kEcho;
    } else if (spec.starts_with("table:")) {
      s.kind = Kind::kTable;
      s.target = std::string(spec.substr(6));
    } else if (spec.starts_with("http://")) {
      s.kind = Kind::kHttp;
      s.target = std::string(spec);
    } else if (spec.starts_with("cmd:")) {
      s.kind = Kind::kCommand;
      s.target = std::string(spec.substr(4));
    } else {
      throw UsageError("unknown backtranslator spec '" + std::string(spec) + "'");
    }
    if (s.kind != Kind::kEcho && s.target.empty()) throw UsageError("backtranslator spec lacks a target");
    return s;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kEcho: return "echo";
      case Kind::kTable: return "table:" + target;
      case Kind::kHttp: return target;
      case Kind::kCommand: return "cmd:" + target;
    }
    return "echo";
  }
};

namespace detail {

inline std::vector<std::string> check_length(std::vector<std::string> out, std::size_t expected) {
  if (out.size() != expected) {
    throw BacktranslatorError("backtranslator returned " + std::to_string(out.size()) + " sentences for " +
                              std::to_string(expected) + " MRs");
  }
  return out;
}

inline std::vector<std::string> http_batch(const BacktranslatorSpec& spec, const std::vector<std::string>& mrs) {
  // http://host[:port][/path]
  std::string_view url(spec.target);
  auto slash = url.find('/', 7);
  std::string host = std::string(url.substr(0, slash));
  std::string path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  httplib::Client cli(host);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(spec.timeout).count();
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(spec.timeout).count() % 1000000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  nlohmann::json req = {{"mrs", mrs}};
  auto res = cli.Post(path, req.dump(), "application/json");
  if (!res) {
    throw BacktranslatorError("backtranslator at " + spec.target + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BacktranslatorError("backtranslator at " + spec.target + " answered HTTP " + std::to_string(res->status));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BacktranslatorError(std::string("backtranslator response is not JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("sentences") || !body["sentences"].is_array()) {
    throw BacktranslatorError("backtranslator response lacks a \"sentences\" array");
  }
  std::vector<std::string> out;
  for (const auto& s : body["sentences"]) {
    if (!s.is_string()) throw BacktranslatorError("backtranslator returned a non-string sentence");
    out.push_back(s.get<std::string>());
  }
  return check_length(std::move(out), mrs.size());
}

// One child process per batch. A socketpair serves as the child's stdin and
// stdout so writes can use MSG_NOSIGNAL instead of touching SIGPIPE.
inline std::vector<std::string> command_batch(const BacktranslatorSpec& spec, const std::vector<std::string>& mrs) {
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw BacktranslatorError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  pid_t pid = fork();
  if (pid < 0) {
    close(sv[0]);
    close(sv[1]);
    throw BacktranslatorError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(sv[1], STDIN_FILENO);
    dup2(sv[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", spec.target.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(sv[1]);
  const int fd = sv[0];

  std::string input;
  for (const auto& mr : mrs) input += nlohmann::json{{"mr", mr}}.dump() + "\n";
  std::thread writer([fd, input = std::move(input)] {
    std::size_t off = 0;
    while (off < input.size()) {
      ssize_t n = send(fd, input.data() + off, input.size() - off, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        break;
      }
      off += static_cast<std::size_t>(n);
    }
    shutdown(fd, SHUT_WR);
  });

  std::string output;
  std::string failure;
  const auto deadline = std::chrono::steady_clock::now() + spec.timeout;
  char buf[65536];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      failure = "backtranslator command timed out";
      break;
    }
    pollfd p{fd, POLLIN, 0};
    int pr = poll(&p, 1, static_cast<int>(left.count()));
    if (pr < 0 && errno == EINTR) continue;
    if (pr == 0) {
      failure = "backtranslator command timed out";
      break;
    }
    ssize_t n = read(fd, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  if (!failure.empty()) {
    kill(pid, SIGKILL);
    shutdown(fd, SHUT_RDWR);
  }
  writer.join();
  close(fd);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!failure.empty()) throw BacktranslatorError(failure);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw BacktranslatorError("backtranslator command exited with status " +
                              std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }

  std::vector<std::string> out;
  detail::for_each_line(output, [&](std::string_view line, int line_no) {
    if (detail::blank(line)) return;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw BacktranslatorError("backtranslator output line " + std::to_string(line_no) + " is not JSON");
    }
    if (j.is_string()) {
      out.push_back(j.get<std::string>());
    } else if (j.is_object() && j.contains("sentence") && j["sentence"].is_string()) {
      out.push_back(j["sentence"].get<std::string>());
    } else {
      throw BacktranslatorError("backtranslator output line " + std::to_string(line_no) + " lacks \"sentence\"");
    }
  });
  return check_length(std::move(out), mrs.size());
}

}  // namespace detail

class Backtranslator {
 public:
  explicit Backtranslator(BacktranslatorSpec spec) : spec_(std::move(spec)) {
    if (spec_.batch_size < 1) throw UsageError("backtranslation batch size must be at least 1");
    if (spec_.kind == BacktranslatorSpec::Kind::kTable) {
      ParallelDataset ds;
      try {
        ds = load_dataset(spec_.target);
      } catch (const DataError& e) {
        throw BacktranslatorError(std::string("cannot load backtranslation table: ") + e.what());
      }
      for (const auto& r : ds.records) table_.emplace(join(tokenize(r.mr)), r.sentence);
    }
  }

  const BacktranslatorSpec& spec() const { return spec_; }

  // One sentence per MR, in order. Any failing batch fails the whole call.
  std::vector<std::string> translate(const std::vector<std::string>& mrs) const {
    const std::size_t nb = (mrs.size() + spec_.batch_size - 1) / spec_.batch_size;
    std::vector<std::vector<std::string>> results(nb);
    parallel_for(nb, spec_.max_in_flight, [&](std::size_t b) {
      auto first = mrs.begin() + static_cast<std::ptrdiff_t>(b * spec_.batch_size);
      auto last = mrs.begin() + static_cast<std::ptrdiff_t>(std::min(mrs.size(), (b + 1) * spec_.batch_size));
      results[b] = translate_batch(std::vector<std::string>(first, last));
    });
    std::vector<std::string> out;
    out.reserve(mrs.size());
    for (auto& r : results) {
      for (auto& s : r) out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::vector<std::string> translate_batch(const std::vector<std::string>& mrs) const {
    switch (spec_.kind) {
      case BacktranslatorSpec::Kind::kEcho:
        return mrs;
      case BacktranslatorSpec::Kind::kTable: {
        std::vector<std::string> out;
        for (const auto& mr : mrs) {
          auto it = table_.find(join(tokenize(mr)));
          if (it == table_.end()) throw BacktranslatorError("no table entry for MR '" + mr + "'");
          out.push_back(it->second);
        }
        return out;
      }
      case BacktranslatorSpec::Kind::kHttp:
        return detail::http_batch(spec_, mrs);
      case BacktranslatorSpec::Kind::kCommand:
        return detail::command_batch(spec_, mrs);
    }
    return {};
  }

  BacktranslatorSpec spec_;
  std::unordered_map<std::string, std::string> table_;
};

inline std::vector<std::string> backtranslate(const std::vector<std::string>& mrs, const BacktranslatorSpec& spec) {
  return Backtranslator(spec).translate(mrs);
}

}  // namespace mrsynth
