#include "seidr/execute.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "seidr/llm.hpp"

namespace seidr {

namespace {

constexpr const char* kExecFailureMarker = "__seidr_exec_failure__: ";
constexpr std::size_t kMaxStderrBytes = 1 << 20;
// Byte backstop for the line cap: a single enormous line is a flood too.
constexpr std::size_t kMaxStdoutBytes = 64 << 20;

struct RawResult {
  std::string stdout_text;
  std::string stderr_text;
  double duration_seconds = 0.0;
  int exit_code = 0;
  int term_signal = 0;  // 0 when exited normally
  bool timed_out = false;
  bool flooded = false;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, O_NONBLOCK); }

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

// Runs argv with stdin_data piped in, capturing both streams. The child is
// placed in its own process group and killed wholesale at the wall-clock
// deadline or when stdout exceeds the line cap.
RawResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data,
                      double timeout_seconds, long max_output_lines, bool limit_file_size) {
  ignore_sigpipe_once();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw SandboxError(std::string("pipe() failed: ") + std::strerror(errno));
  }

  pid_t pid = ::fork();
  if (pid < 0) throw SandboxError(std::string("fork() failed: ") + std::strerror(errno));

  if (pid == 0) {
    ::setpgid(0, 0);
    ::signal(SIGPIPE, SIG_DFL);  // candidates get the default pipe semantics
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) {
      ::close(fd);
    }
    if (timeout_seconds > 0) {
      rlimit cpu{};
      cpu.rlim_cur = static_cast<rlim_t>(std::ceil(timeout_seconds)) + 1;
      cpu.rlim_max = cpu.rlim_cur + 1;
      ::setrlimit(RLIMIT_CPU, &cpu);
    }
    if (limit_file_size) {
      rlimit fsize{};
      fsize.rlim_cur = 256ull << 20;
      fsize.rlim_max = 256ull << 20;
      ::setrlimit(RLIMIT_FSIZE, &fsize);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    // exec failed; report through the captured stderr stream.
    std::string message = kExecFailureMarker + argv[0] + ": " + std::strerror(errno) + "\n";
    ssize_t ignored = ::write(STDERR_FILENO, message.data(), message.size());
    (void)ignored;
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int in_fd = in_pipe[1];
  int out_fd = out_pipe[0];
  int err_fd = err_pipe[0];
  set_nonblocking(in_fd);
  set_nonblocking(out_fd);
  set_nonblocking(err_fd);

  RawResult result;
  std::string& out_text = result.stdout_text;
  std::string err_text;
  std::size_t stdout_newlines = 0;
  std::size_t stderr_stored = 0;
  std::size_t stdin_written = 0;
  bool stdin_open = true;
  if (stdin_data.empty()) {
    ::close(in_fd);
    stdin_open = false;
  }

  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + std::chrono::duration<double>(timeout_seconds);
  // Everything in the group is SIGKILLed at the deadline; this cutoff only
  // guards against a pipe held open by something that escaped the group.
  const auto hard_cutoff = deadline + std::chrono::seconds(5);
  bool killed = false;
  bool child_reaped = false;
  int wait_status = 0;
  bool out_eof = false;
  bool err_eof = false;
  char buffer[8192];

  auto kill_group = [&] {
    if (killed) return;
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    killed = true;
  };

  while (!(out_eof && err_eof && child_reaped)) {
    auto now = std::chrono::steady_clock::now();
    if (!killed && now >= deadline) {
      result.timed_out = true;
      kill_group();
    }
    if (now >= hard_cutoff) break;

    if (!child_reaped) {
      pid_t reaped = ::waitpid(pid, &wait_status, WNOHANG);
      if (reaped == pid) child_reaped = true;
    }

    pollfd fds[3];
    nfds_t nfds = 0;
    int out_slot = -1, err_slot = -1, in_slot = -1;
    if (!out_eof) {
      out_slot = static_cast<int>(nfds);
      fds[nfds++] = {out_fd, POLLIN, 0};
    }
    if (!err_eof) {
      err_slot = static_cast<int>(nfds);
      fds[nfds++] = {err_fd, POLLIN, 0};
    }
    if (stdin_open) {
      in_slot = static_cast<int>(nfds);
      fds[nfds++] = {in_fd, POLLOUT, 0};
    }
    if (nfds == 0 && !child_reaped) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      continue;
    }
    ::poll(fds, nfds, 20);

    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
      for (;;) {
        ssize_t n = ::read(out_fd, buffer, sizeof(buffer));
        if (n > 0) {
          out_text.append(buffer, static_cast<std::size_t>(n));
          stdout_newlines += static_cast<std::size_t>(std::count(buffer, buffer + n, '\n'));
          bool too_many_lines = max_output_lines >= 0 &&
                                stdout_newlines > static_cast<std::size_t>(max_output_lines);
          if (too_many_lines || out_text.size() > kMaxStdoutBytes) {
            result.flooded = true;
            kill_group();
            break;
          }
          continue;
        }
        if (n == 0) {
          out_eof = true;
          ::close(out_fd);
        }
        break;
      }
    }
    if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
      for (;;) {
        ssize_t n = ::read(err_fd, buffer, sizeof(buffer));
        if (n > 0) {
          std::size_t keep = std::min(static_cast<std::size_t>(n), kMaxStderrBytes - stderr_stored);
          err_text.append(buffer, keep);
          stderr_stored += keep;
          continue;
        }
        if (n == 0) {
          err_eof = true;
          ::close(err_fd);
        }
        break;
      }
    }
    if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
        ::close(in_fd);
        stdin_open = false;
      } else {
        ssize_t n = ::write(in_fd, stdin_data.data() + stdin_written,
                            stdin_data.size() - stdin_written);
        if (n > 0) {
          stdin_written += static_cast<std::size_t>(n);
        } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
          ::close(in_fd);
          stdin_open = false;
        }
        if (stdin_open && stdin_written == stdin_data.size()) {
          ::close(in_fd);
          stdin_open = false;
        }
      }
    }
  }

  if (stdin_open) ::close(in_fd);
  if (!out_eof) ::close(out_fd);
  if (!err_eof) ::close(err_fd);
  if (!child_reaped) {
    kill_group();
    ::waitpid(pid, &wait_status, 0);
  }

  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(wait_status)) {
    result.exit_code = WEXITSTATUS(wait_status);
  } else if (WIFSIGNALED(wait_status)) {
    result.term_signal = WTERMSIG(wait_status);
    result.exit_code = 128 + result.term_signal;
    // A CPU-rlimit kill is a timeout in all but name.
    if (!result.timed_out && (result.term_signal == SIGXCPU || result.term_signal == SIGKILL) &&
        result.duration_seconds >= timeout_seconds) {
      result.timed_out = true;
    }
  }
  result.stderr_text = err_text;
  return result;
}

std::string strip_one_trailing_newline(std::string text) {
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SandboxError("cannot write " + path.string());
  out << content;
}

// Parallel workers can hit the same unit path when cases share a snippet;
// rename keeps every observer on a complete file.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
  static std::atomic<int> counter{0};
  auto temp = path;
  temp += ".tmp" + std::to_string(counter.fetch_add(1));
  write_text_file(temp, content);
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) throw SandboxError("cannot move " + temp.string() + " into place: " + ec.message());
}

}  // namespace

std::string to_string(ExitStatus status) {
  switch (status) {
    case ExitStatus::ok:
      return "ok";
    case ExitStatus::nonzero_exit:
      return "nonzero_exit";
    case ExitStatus::compile_error:
      return "compile_error";
    case ExitStatus::timeout:
      return "timeout";
    case ExitStatus::output_flood:
      return "output_flood";
  }
  return "ok";
}

std::vector<std::string> split_output_lines(const std::string& text) {
  if (text.empty()) return {};
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

double score_outcome(const ExecutionOutcome& outcome, const std::vector<std::string>& expected) {
  if (outcome.status != ExitStatus::ok) return 0.0;
  if (!outcome.stderr_text.empty()) return 0.0;
  std::vector<std::string> want = expected;
  if (!want.empty() && want.back().empty()) want.pop_back();
  const auto& got = outcome.stdout_lines;
  std::size_t n = std::max(want.size(), got.size());
  if (n == 0) return 1.0;
  std::size_t matches = 0;
  std::size_t common = std::min(want.size(), got.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (want[i] == got[i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(n);
}

Runner::Runner(Language language, ExecLimits limits, std::string scratch_dir,
               ToolchainConfig toolchain, int workers)
    : language_(language),
      limits_(limits),
      scratch_dir_(std::move(scratch_dir)),
      toolchain_(std::move(toolchain)),
      workers_(std::max(1, workers)) {
  std::error_code ec;
  std::filesystem::create_directories(scratch_dir_, ec);
  if (ec) throw SandboxError("cannot create scratch directory " + scratch_dir_);
}

int Runner::compile_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return compile_count_;
}

std::string Runner::candidate_dir(const Candidate& candidate) {
  std::string name = candidate.id >= 0 ? "cand_" + std::to_string(candidate.id)
                                       : "anon_" + fnv1a64_hex(candidate.source).substr(0, 8);
  auto dir = std::filesystem::path(scratch_dir_) / name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw SandboxError("cannot create candidate directory " + dir.string());
  return dir.string();
}

const Runner::CompiledUnit& Runner::compile_unit(const std::string& unit_source,
                                                 const std::string& dir) {
  // Serializing compilations keeps the cache fill race-free; parallel workers
  // only ever contend here when distinct cases share a translation unit.
  std::lock_guard<std::mutex> compile_lock(compile_mutex_);
  const std::string digest = fnv1a64_hex(unit_source);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = compile_cache_.find(digest);
    if (it != compile_cache_.end()) return it->second;
  }

  auto source_path = std::filesystem::path(dir) / ("u_" + digest.substr(0, 8) + ".cpp");
  auto binary_path = std::filesystem::path(dir) / ("u_" + digest.substr(0, 8) + ".bin");
  write_text_file(source_path, unit_source);

  std::vector<std::string> argv{toolchain_.cpp_compiler};
  argv.insert(argv.end(), toolchain_.cpp_compile_flags.begin(), toolchain_.cpp_compile_flags.end());
  argv.push_back(source_path.string());
  argv.push_back("-o");
  argv.push_back(binary_path.string());

  RawResult raw = run_process(argv, "", limits_.compile_timeout, -1, false);

  CompiledUnit unit;
  if (raw.exit_code == 127 && raw.stderr_text.rfind(kExecFailureMarker, 0) == 0) {
    throw SandboxError("compiler not available: " + strip_one_trailing_newline(raw.stderr_text));
  }
  if (raw.timed_out || raw.exit_code != 0) {
    unit.ok = false;
    unit.failure.status = ExitStatus::compile_error;
    unit.failure.duration_seconds = raw.duration_seconds;
    unit.failure.stderr_text = strip_one_trailing_newline(raw.stderr_text);
    if (unit.failure.stderr_text.empty()) {
      unit.failure.stderr_text = raw.timed_out
                                     ? "compilation timed out"
                                     : "compiler exited with status " + std::to_string(raw.exit_code);
    }
  } else {
    unit.ok = true;
    unit.binary_path = binary_path.string();
  }

  std::lock_guard<std::mutex> lock(mutex_);
  ++compile_count_;
  return compile_cache_.emplace(digest, std::move(unit)).first->second;
}

ExecutionOutcome Runner::run_candidate(const Candidate& candidate, const TestCase& test) {
  return run_case(candidate, test, -1);
}

ExecutionOutcome Runner::run_case(const Candidate& candidate, const TestCase& test,
                                  int case_index) {
  const std::string dir = candidate_dir(candidate);
  const bool is_assertion = test.kind == CaseKind::assertion;
  const std::string unit_source =
      is_assertion ? candidate.source + "\n" + test.snippet + "\n" : candidate.source;

  std::string stdin_data;
  if (!is_assertion) {
    for (const auto& line : test.input_lines) {
      stdin_data += line;
      stdin_data += '\n';
    }
  }

  ExecutionOutcome outcome;
  RawResult raw;
  if (language_ == Language::cpp) {
    const CompiledUnit& unit = compile_unit(unit_source, dir);
    if (!unit.ok) {
      outcome = unit.failure;
    } else {
      raw = run_process({unit.binary_path}, stdin_data, limits_.run_timeout,
                        limits_.max_output_lines, true);
    }
  } else {
    const std::string digest = fnv1a64_hex(unit_source);
    auto source_path = std::filesystem::path(dir) / ("u_" + digest.substr(0, 8) + ".py");
    if (!std::filesystem::exists(source_path)) write_text_file_atomic(source_path, unit_source);
    raw = run_process({toolchain_.python_interpreter, source_path.string()}, stdin_data,
                      limits_.run_timeout, limits_.max_output_lines, true);
  }

  if (outcome.status != ExitStatus::compile_error) {
    if (raw.exit_code == 127 && raw.stderr_text.rfind(kExecFailureMarker, 0) == 0) {
      throw SandboxError("interpreter not available: " +
                         strip_one_trailing_newline(raw.stderr_text));
    }
    outcome.stdout_lines = split_output_lines(raw.stdout_text);
    if (static_cast<long>(outcome.stdout_lines.size()) > limits_.max_output_lines) {
      outcome.stdout_lines.resize(static_cast<std::size_t>(limits_.max_output_lines));
    }
    outcome.stderr_text = strip_one_trailing_newline(raw.stderr_text);
    outcome.duration_seconds = raw.duration_seconds;
    if (raw.timed_out) {
      outcome.status = ExitStatus::timeout;
    } else if (raw.flooded) {
      outcome.status = ExitStatus::output_flood;
    } else if (raw.term_signal != 0) {
      outcome.status = ExitStatus::nonzero_exit;
      if (outcome.stderr_text.empty()) {
        outcome.stderr_text = "process terminated by signal " + std::to_string(raw.term_signal);
      }
    } else if (raw.exit_code != 0) {
      outcome.status = ExitStatus::nonzero_exit;
    } else {
      outcome.status = ExitStatus::ok;
    }
  }

  if (case_index >= 0) {
    auto base = std::filesystem::path(dir) / ("case_" + std::to_string(case_index));
    std::string joined;
    for (const auto& line : outcome.stdout_lines) {
      joined += line;
      joined += '\n';
    }
    write_text_file(base.string() + ".stdout", joined);
    write_text_file(base.string() + ".stderr", outcome.stderr_text);
  }
  return outcome;
}

EvaluationRecord Runner::evaluate(Candidate& candidate, const std::vector<TestCase>& cases) {
  if (cases.empty()) throw RangeError("evaluate requires at least one test case");

  EvaluationRecord record;
  record.outcomes.resize(cases.size());
  record.scores.resize(cases.size());

  auto eval_one = [&](std::size_t j) {
    ExecutionOutcome outcome = run_case(candidate, cases[j], static_cast<int>(j));
    double score;
    if (cases[j].kind == CaseKind::assertion) {
      score = (outcome.status == ExitStatus::ok && outcome.stderr_text.empty()) ? 1.0 : 0.0;
    } else {
      score = score_outcome(outcome, cases[j].expected_output_lines);
    }
    record.outcomes[j] = std::move(outcome);
    record.scores[j] = score;
  };

  if (workers_ <= 1 || cases.size() <= 1) {
    for (std::size_t j = 0; j < cases.size(); ++j) eval_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        std::size_t j = next.fetch_add(1);
        if (j >= cases.size()) return;
        try {
          eval_one(j);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    int n_threads = std::min<int>(workers_, static_cast<int>(cases.size()));
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  double total = 0.0;
  for (double s : record.scores) total += s;
  record.avg = total / static_cast<double>(record.scores.size());

  candidate.per_test_scores = record.scores;
  candidate.avg_score = record.avg;
  return record;
}

}  // namespace seidr
