// Copyright 2026 The attrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRIB_SUBPROCESS_H_
#define ATTRIB_SUBPROCESS_H_

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attrib {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // combined stdout/stderr, truncated to the last 4 KiB
};

// Runs: /bin/sh -c '<command> "$@"' sh args...
// The command string may therefore carry its own arguments. On timeout the
// whole process group is killed.
ProcessResult RunShellCommand(const std::string& command,
                              const std::vector<std::string>& args,
                              std::chrono::milliseconds timeout);

// Directory for temporary files: $ATTRIB_TMPDIR if set, else the system
// temp directory.
std::filesystem::path TempRoot();

// Uniquely named directory removed (recursively) on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  // Fresh file name inside the directory.
  std::filesystem::path NewFile(std::string_view stem, std::string_view ext);

 private:
  std::filesystem::path path_;
  unsigned long long counter_ = 0;
};

// Long-lived child process that answers one line per request line.
// Not thread-safe; callers serialize.
class LineProcess {
 public:
  explicit LineProcess(const std::string& command);
  ~LineProcess();
  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  // Sends 'line' plus a newline and waits for one response line.
  std::string Request(std::string_view line, std::chrono::milliseconds timeout);
  bool alive() const { return pid_ > 0; }

 private:
  void Kill();

  int pid_ = -1;
  int fd_ = -1;  // socket connected to the child's stdin and stdout
  std::string pending_;
};

}  // namespace attrib

#endif  // ATTRIB_SUBPROCESS_H_
