#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "seidr/core.hpp"
#include "seidr/errors.hpp"

namespace seidr {

enum class ExitStatus { ok, nonzero_exit, compile_error, timeout, output_flood };

std::string to_string(ExitStatus status);

struct ExecutionOutcome {
  std::vector<std::string> stdout_lines;
  std::string stderr_text;
  ExitStatus status = ExitStatus::ok;
  double duration_seconds = 0.0;
};

struct ToolchainConfig {
  std::string python_interpreter = "python3";
  std::string cpp_compiler = "g++";
  std::vector<std::string> cpp_compile_flags = {"-std=c++17", "-O1"};
};

// Splits captured output into lines: '\n' separators, with a single trailing
// blank line dropped. No other normalization; comparison stays byte-exact.
std::vector<std::string> split_output_lines(const std::string& text);

// Line accuracy over max(|expected|, |stdout|), zeroed whenever stderr is
// non-empty or the status is not ok. Two empty streams count as a full match.
double score_outcome(const ExecutionOutcome& outcome, const std::vector<std::string>& expected);

// Per-candidate evaluation result; outcomes are kept so the instruct stage
// can inspect the first failing case.
struct EvaluationRecord {
  std::vector<ExecutionOutcome> outcomes;
  std::vector<double> scores;
  double avg = 0.0;
};

// Compiles (when the language needs it) and runs candidates against test
// cases in a scratch directory, one subdirectory per candidate holding the
// source, binary and per-case stdout/stderr captures. C++ compilation happens
// once per distinct translation unit and is cached; the cache is internally
// synchronized, and distinct cases may be executed by parallel workers.
class Runner {
 public:
  Runner(Language language, ExecLimits limits, std::string scratch_dir,
         ToolchainConfig toolchain = {}, int workers = 1);

  // Runs one candidate against one case. I/O pairs are fed input_lines on
  // stdin with both streams captured; assertion cases run the candidate
  // concatenated with the snippet and pass iff the process exits 0 silently.
  ExecutionOutcome run_candidate(const Candidate& candidate, const TestCase& test);

  // Runs every case, fills per_test_scores/avg_score on the candidate and
  // returns scores plus captured outcomes joined by case index.
  EvaluationRecord evaluate(Candidate& candidate, const std::vector<TestCase>& cases);

  // Number of compiler invocations so far (for cache observability).
  int compile_count() const;

  const ExecLimits& limits() const { return limits_; }

 private:
  struct CompiledUnit {
    bool ok = false;
    std::string binary_path;
    ExecutionOutcome failure;
  };

  ExecutionOutcome run_case(const Candidate& candidate, const TestCase& test, int case_index);
  std::string candidate_dir(const Candidate& candidate);
  const CompiledUnit& compile_unit(const std::string& unit_source, const std::string& dir);

  Language language_;
  ExecLimits limits_;
  std::string scratch_dir_;
  ToolchainConfig toolchain_;
  int workers_;
  std::map<std::string, CompiledUnit> compile_cache_;
  int compile_count_ = 0;
  mutable std::mutex mutex_;
  std::mutex compile_mutex_;
};

}  // namespace seidr
