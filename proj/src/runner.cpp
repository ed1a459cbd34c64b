#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <thread>

#include "grass/error.hpp"
#include "grass/harness.hpp"

namespace grass {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

bool is_executable(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

// First whitespace-delimited word of the template, ignoring leading
// VAR=value assignments.
std::string program_of(const std::string& command_template) {
  std::size_t pos = 0;
  while (true) {
    pos = command_template.find_first_not_of(" \t", pos);
    if (pos == std::string::npos) return {};
    const auto end = command_template.find_first_of(" \t", pos);
    auto word = command_template.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    const auto eq = word.find('=');
    if (eq == std::string::npos || word.find('/') < eq) return word;
    if (end == std::string::npos) return {};
    pos = end;
  }
}

}  // namespace

std::string expand_command(const std::string& command_template, const std::string& instance_path) {
  static const std::string kPlaceholder = "{instance}";
  const auto quoted = shell_quote(instance_path);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = command_template.find(kPlaceholder, pos);
    if (hit == std::string::npos) break;
    out.append(command_template, pos, hit - pos);
    out += quoted;
    pos = hit + kPlaceholder.size();
  }
  out.append(command_template, pos, std::string::npos);
  return out;
}

void check_solver_binary(const ExternalSolver& solver) {
  const auto prog = program_of(solver.command_template);
  if (prog.empty()) {
    throw Error(ErrorCode::MissingBinary, "solver '" + solver.name + "' has an empty command");
  }
  if (prog.find('/') != std::string::npos) {
    if (!is_executable(prog)) {
      throw Error(ErrorCode::MissingBinary,
                  "solver '" + solver.name + "': '" + prog + "' is not an executable file");
    }
    return;
  }
  const char* path_env = std::getenv("PATH");
  const std::string path = path_env ? path_env : "/usr/bin:/bin";
  for (const auto& dir : split(path, ':')) {
    if (!dir.empty() && is_executable(std::filesystem::path(dir) / prog)) return;
  }
  throw Error(ErrorCode::MissingBinary,
              "solver '" + solver.name + "': '" + prog + "' not found on PATH");
}

std::vector<ExternalSolver> load_external_solvers(const std::string& path) {
  const auto cfg = KeyValueConfig::load(path);
  const auto count = parse_int(cfg.get("solvers"), path + " solvers");
  if (count <= 0) throw Error(ErrorCode::InvalidArgument, path + ": solver count must be positive");
  std::vector<ExternalSolver> out;
  for (long long k = 0; k < count; ++k) {
    const std::string p = "solver." + std::to_string(k) + ".";
    ExternalSolver s;
    s.name = cfg.get_or(p + "name", "solver" + std::to_string(k));
    s.command_template = cfg.get(p + "cmd");
    if (s.command_template.find("{instance}") == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  path + ": " + p + "cmd lacks the {instance} placeholder");
    }
    out.push_back(std::move(s));
  }
  return out;
}

RunResult run_with_cutoff(const std::string& command, double cutoff) {
  if (!(cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be positive");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::Io, std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    const int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDOUT_FILENO);
      ::dup2(devnull, STDERR_FILENO);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  // Set from both sides so the kill below cannot race the child's own call.
  ::setpgid(pid, pid);

  RunResult res;
  const auto limit = std::chrono::duration<double>(cutoff);
  auto sleep_for = std::chrono::microseconds(200);
  int status = 0;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      throw Error(ErrorCode::Io, std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (clock::now() - start >= limit) {
      ::killpg(pid, SIGKILL);
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      res.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(sleep_for);
    sleep_for = std::min(sleep_for * 2, std::chrono::microseconds(5000));
  }
  const double elapsed = std::chrono::duration<double>(clock::now() - start).count();

  if (res.timed_out) {
    res.seconds = cutoff;
    res.exit_code = -1;
    return res;
  }
  if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  } else {
    res.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  }
  // 10 and 20 are the SAT/UNSAT conventions of competition solvers.
  if (res.exit_code != 0 && res.exit_code != 10 && res.exit_code != 20) {
    res.crashed = true;
    res.seconds = cutoff;
    return res;
  }
  res.seconds = std::clamp(std::round(elapsed * 1000.0) / 1000.0, 0.001, cutoff);
  return res;
}

}  // namespace grass
