#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "seidr/errors.hpp"

namespace seidr {

enum class Language { python, cpp };

std::string to_string(Language language);
Language language_from_string(const std::string& text);

enum class CaseKind { io_pair, assertion };
enum class CaseOrigin { edge, random, unspecified };

// One test: either an I/O pair (lines fed to stdin, lines expected on stdout)
// or a self-contained assertion snippet appended to the candidate source.
struct TestCase {
  CaseKind kind = CaseKind::io_pair;
  CaseOrigin origin = CaseOrigin::unspecified;
  std::vector<std::string> input_lines;
  std::vector<std::string> expected_output_lines;
  std::string snippet;

  static TestCase io(std::vector<std::string> input, std::vector<std::string> expected,
                     CaseOrigin origin = CaseOrigin::unspecified);
  static TestCase assertion_case(std::string snippet, CaseOrigin origin = CaseOrigin::unspecified);
};

// One benchmark task. validation_cases drive scoring during search;
// test_cases are used only for the final pass-rate verdict. For datasets
// without a held-out split the two lists are equal.
struct Problem {
  std::string id;
  std::string name;
  std::string description;
  Language language = Language::python;
  std::vector<TestCase> prompt_cases;
  std::vector<TestCase> validation_cases;
  std::vector<TestCase> test_cases;
};

enum class CandidateOrigin { draft, repair };

std::string to_string(CandidateOrigin origin);

// One program in the search tree. Ids are assigned in creation order starting
// at 0; that order is the budget axis for pass@k and the excess-programs
// metric.
struct Candidate {
  int id = -1;
  std::optional<int> parent_id;
  int generation = 0;
  std::string source;
  double temperature = 0.0;
  CandidateOrigin origin = CandidateOrigin::draft;
  std::optional<std::string> instruction;
  std::optional<std::vector<double>> per_test_scores;
  std::optional<double> avg_score;

  // True when every validation score is exactly 1.
  bool validation_perfect() const;
};

enum class Selection { tournament, lexicase };

std::string to_string(Selection selection);
Selection selection_from_string(const std::string& text);

struct ExecLimits {
  double compile_timeout = 30.0;  // seconds
  double run_timeout = 10.0;      // seconds
  int max_output_lines = 10000;
};

// Sentinel for "unbounded" beam width / draft count. Normalized to
// max_programs by validate_config, which makes the first generation the only
// one.
inline constexpr int kInfArity = std::numeric_limits<int>::max();

struct SearchConfig {
  int beam_width = 1;    // W
  int n_draft = 1;       // programs in the first generation
  int n_explain = 1;     // bug explanations per selected parent
  int n_debug = 1;       // repairs per explanation
  int max_programs = 1;  // M, total candidate budget
  Selection selection = Selection::tournament;
  std::uint64_t seed = 0;
  ExecLimits exec_limits;
};

// Returns a copy with inf sentinels replaced by max_programs; throws
// ConfigError naming the offending field on any invariant violation.
SearchConfig validate_config(const SearchConfig& config);

// Fan-out before budget truncation: n_draft at generation 0, otherwise
// beam_width * n_explain * n_debug (saturating).
std::int64_t children_per_generation(const SearchConfig& config, int generation);

}  // namespace seidr
