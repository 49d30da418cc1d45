#include "seidr/core.hpp"

#include <utility>

namespace seidr {

std::string to_string(Language language) {
  return language == Language::python ? "python" : "cpp";
}

Language language_from_string(const std::string& text) {
  if (text == "python") return Language::python;
  if (text == "cpp" || text == "c++") return Language::cpp;
  throw ConfigError("unknown language: " + text);
}

std::string to_string(CandidateOrigin origin) {
  return origin == CandidateOrigin::draft ? "draft" : "repair";
}

std::string to_string(Selection selection) {
  return selection == Selection::tournament ? "tournament" : "lexicase";
}

Selection selection_from_string(const std::string& text) {
  if (text == "tournament") return Selection::tournament;
  if (text == "lexicase") return Selection::lexicase;
  throw ConfigError("unknown selection strategy: " + text);
}

TestCase TestCase::io(std::vector<std::string> input, std::vector<std::string> expected,
                      CaseOrigin origin) {
  TestCase result;
  result.kind = CaseKind::io_pair;
  result.origin = origin;
  result.input_lines = std::move(input);
  result.expected_output_lines = std::move(expected);
  return result;
}

TestCase TestCase::assertion_case(std::string snippet, CaseOrigin origin) {
  TestCase result;
  result.kind = CaseKind::assertion;
  result.origin = origin;
  result.snippet = std::move(snippet);
  return result;
}

bool Candidate::validation_perfect() const {
  if (!per_test_scores || per_test_scores->empty()) return false;
  for (double score : *per_test_scores) {
    if (score != 1.0) return false;
  }
  return true;
}

SearchConfig validate_config(const SearchConfig& config) {
  SearchConfig normalized = config;
  if (normalized.max_programs < 1) {
    throw ConfigError("max_programs must be >= 1");
  }
  if (normalized.beam_width == kInfArity) normalized.beam_width = normalized.max_programs;
  if (normalized.n_draft == kInfArity) normalized.n_draft = normalized.max_programs;
  if (normalized.beam_width < 1) throw ConfigError("beam_width must be >= 1");
  if (normalized.n_draft < 1) throw ConfigError("n_draft must be >= 1");
  if (normalized.n_explain < 1) throw ConfigError("n_explain must be >= 1");
  if (normalized.n_debug < 1) throw ConfigError("n_debug must be >= 1");
  if (normalized.n_draft > normalized.max_programs) {
    throw ConfigError("n_draft exceeds max_programs");
  }
  if (!(normalized.exec_limits.compile_timeout > 0)) {
    throw ConfigError("exec_limits.compile_timeout must be > 0");
  }
  if (!(normalized.exec_limits.run_timeout > 0)) {
    throw ConfigError("exec_limits.run_timeout must be > 0");
  }
  if (normalized.exec_limits.max_output_lines < 1) {
    throw ConfigError("exec_limits.max_output_lines must be >= 1");
  }
  return normalized;
}

namespace {

std::int64_t saturating_mul(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  if (a > kMax / b) return kMax;
  return a * b;
}

}  // namespace

std::int64_t children_per_generation(const SearchConfig& config, int generation) {
  if (generation < 0) throw RangeError("generation must be >= 0");
  if (generation == 0) return config.n_draft;
  return saturating_mul(saturating_mul(config.beam_width, config.n_explain), config.n_debug);
}

}  // namespace seidr
