#pragma once

// A child process driven over its standard input/output, one line per
// message. POSIX only.

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <optional>
#include <string>

#include "glow/core/errors.hpp"

namespace glow {

class LineProcess {
 public:
  // Runs `command` through /bin/sh. Throws EnvironmentUnavailable when the
  // process cannot be created.
  explicit LineProcess(const std::string& command) {
    // A dead child must surface as a write error, not kill the caller.
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) throw EnvironmentUnavailable(std::string("pipe: ") + std::strerror(errno));
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw EnvironmentUnavailable(std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
      throw EnvironmentUnavailable(std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      setpgid(0, 0);
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
      const std::string script = "exec " + command;
      execl("/bin/sh", "sh", "-c", script.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  ~LineProcess() { terminate(); }

  bool write_line(const std::string& line) {
    if (in_ < 0) return false;
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      ssize_t n = ::write(in_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    return true;
  }

  // Next line without its newline; nullopt on EOF or when nothing complete
  // arrives within `timeout`.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (out_ < 0) return std::nullopt;
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        timed_out_ = true;
        return std::nullopt;
      }
      pollfd pfd{out_, POLLIN, 0};
      int r = poll(&pfd, 1, static_cast<int>(left.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      if (r == 0) continue;
      char chunk[4096];
      ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      if (n == 0) {
        close(out_);
        out_ = -1;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  bool timed_out() const noexcept { return timed_out_; }

  bool running() {
    if (pid_ <= 0) return false;
    int status = 0;
    pid_t r = waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      exit_status_ = status;
      return false;
    }
    return r == 0;
  }

  // Closes stdin, gives the child a moment to exit, then kills it.
  void terminate() {
    if (in_ >= 0) close(in_), in_ = -1;
    if (pid_ > 0) {
      for (int i = 0; i < 50 && running(); ++i) usleep(2000);
      if (pid_ > 0) {
        kill(-pid_, SIGKILL);  // the whole group, in case the command forked
        kill(pid_, SIGKILL);
        int status = 0;
        waitpid(pid_, &status, 0);
        exit_status_ = status;
        pid_ = -1;
      }
    }
    if (out_ >= 0) close(out_), out_ = -1;
  }

  std::optional<int> exit_status() const noexcept { return exit_status_; }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
  bool timed_out_ = false;
  std::optional<int> exit_status_;
};

}  // namespace glow
