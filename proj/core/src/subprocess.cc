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

#include "attrib/subprocess.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <random>

#include "attrib/error.h"

namespace attrib {
namespace {

constexpr std::size_t kOutputTail = 4096;

using Clock = std::chrono::steady_clock;

std::vector<std::string> ShellArgv(const std::string& command,
                                   const std::vector<std::string>& args) {
  std::vector<std::string> argv = {"/bin/sh", "-c", command + " \"$@\"", "sh"};
  argv.insert(argv.end(), args.begin(), args.end());
  return argv;
}

// Forks and execs argv with stdin/stdout/stderr wired to the given fds
// (-1 leaves the descriptor pointing at /dev/null). The child leads its own
// process group. Every descriptor we open is close-on-exec, so the child
// inherits nothing else.
pid_t Spawn(const std::vector<std::string>& argv, int in_fd, int out_fd,
            int err_fd) {
  std::vector<char*> cargv;
  for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid < 0) throw IoError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    const int devnull = open("/dev/null", O_RDWR);
    dup2(in_fd >= 0 ? in_fd : devnull, 0);
    dup2(out_fd >= 0 ? out_fd : devnull, 1);
    dup2(err_fd >= 0 ? err_fd : devnull, 2);
    signal(SIGPIPE, SIG_DFL);
    execv(cargv[0], cargv.data());
    _exit(127);
  }
  setpgid(pid, pid);
  return pid;
}

int WaitExit(pid_t pid) {
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

int RemainingMs(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

}  // namespace

ProcessResult RunShellCommand(const std::string& command,
                              const std::vector<std::string>& args,
                              std::chrono::milliseconds timeout) {
  int fds[2];
  if (pipe2(fds, O_CLOEXEC) != 0) {
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  }
  pid_t pid;
  try {
    pid = Spawn(ShellArgv(command, args), -1, fds[1], fds[1]);
  } catch (...) {
    close(fds[0]);
    close(fds[1]);
    throw;
  }
  close(fds[1]);

  ProcessResult result;
  const auto deadline = Clock::now() + timeout;
  char buf[4096];
  for (;;) {
    pollfd p{fds[0], POLLIN, 0};
    const int ready = poll(&p, 1, RemainingMs(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      break;
    }
    const ssize_t n = read(fds[0], buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
    if (result.output.size() > 2 * kOutputTail) {
      result.output.erase(0, result.output.size() - kOutputTail);
    }
  }
  close(fds[0]);
  result.exit_code = WaitExit(pid);
  if (result.output.size() > kOutputTail) {
    result.output.erase(0, result.output.size() - kOutputTail);
  }
  return result;
}

std::filesystem::path TempRoot() {
  if (const char* env = std::getenv("ATTRIB_TMPDIR"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::filesystem::temp_directory_path();
}

TempDir::TempDir(std::string_view prefix) {
  static std::atomic<unsigned long long> serial{0};
  const std::filesystem::path root = TempRoot();
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const std::string name = std::string(prefix) + "-" +
                             std::to_string(getpid()) + "-" +
                             std::to_string(serial++) + "-" +
                             std::to_string(rd() % 100000);
    std::filesystem::path candidate = root / name;
    if (std::filesystem::create_directory(candidate, ec)) {
      path_ = std::move(candidate);
      return;
    }
  }
  throw IoError("cannot create a temporary directory under " + root.string());
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path TempDir::NewFile(std::string_view stem,
                                       std::string_view ext) {
  return path_ / (std::string(stem) + "-" + std::to_string(counter_++) +
                  std::string(ext));
}

LineProcess::LineProcess(const std::string& command) {
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw IoError(std::string("socketpair failed: ") + std::strerror(errno));
  }
  try {
    pid_ = Spawn(ShellArgv(command, {}), sv[1], sv[1], -1);
  } catch (...) {
    close(sv[0]);
    close(sv[1]);
    throw;
  }
  close(sv[1]);
  fd_ = sv[0];
}

LineProcess::~LineProcess() {
  if (fd_ >= 0) {
    shutdown(fd_, SHUT_WR);
    close(fd_);
  }
  if (pid_ > 0) {
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      int status;
      if (waitpid(pid_, &status, WNOHANG) == pid_) return;
      usleep(2000);
    }
    kill(-pid_, SIGKILL);
    WaitExit(pid_);
  }
}

void LineProcess::Kill() {
  if (pid_ > 0) {
    kill(-pid_, SIGKILL);
    WaitExit(pid_);
    pid_ = -1;
  }
  if (fd_ >= 0) {
    close(fd_);
    fd_ = -1;
  }
}

std::string LineProcess::Request(std::string_view line,
                                 std::chrono::milliseconds timeout) {
  if (!alive()) throw IoError("score server is not running");
  std::string msg(line);
  msg.push_back('\n');
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const ssize_t n = send(fd_, msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      Kill();
      throw IoError("score server closed its input");
    }
    sent += static_cast<std::size_t>(n);
  }
  const auto deadline = Clock::now() + timeout;
  char buf[4096];
  for (;;) {
    if (const std::size_t nl = pending_.find('\n'); nl != std::string::npos) {
      std::string reply = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return reply;
    }
    pollfd p{fd_, POLLIN, 0};
    const int ready = poll(&p, 1, RemainingMs(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) {
      Kill();
      throw IoError("score server timed out");
    }
    const ssize_t n = recv(fd_, buf, sizeof(buf), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      Kill();
      throw IoError("score server exited without replying");
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

}  // namespace attrib
