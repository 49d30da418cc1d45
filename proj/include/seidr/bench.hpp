#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seidr/core.hpp"

namespace seidr {

// Loads one PSB2 problem from <root>/<problem_id>/<problem_id>-edge.csv and
// -random.csv (the distributed per-problem case files). Validation cases are
// edge rows first, topped up with seeded random-split rows; test cases are a
// seeded sample of the remaining random rows, so the two never share a row.
// Prompt cases are the first five validation cases. An optional
// description.txt beside the CSVs supplies the task text.
Problem load_psb2(const std::string& root, const std::string& problem_id, int n_validation,
                  int n_test, std::uint64_t seed, Language language = Language::python);

// Loads a HumanEval-X release file (JSON lines with task_id, prompt,
// declaration, test). Each record becomes one problem whose description is
// the prompt (docstring + signature) and whose validation and test cases are
// both the split assertions: the dataset has no held-out split.
std::vector<Problem> load_humaneval_x(const std::string& file, Language language);

// Splits an aggregated test function into one self-contained assertion
// snippet per top-level assertion statement. Setup statements are replicated
// into every snippet that follows them; an assertion nested in a loop or
// branch keeps its whole enclosing statement as a single case.
std::vector<TestCase> split_tests(const std::string& aggregate_test_source, Language language);

// Strict-ish RFC 4180 row parser used by the PSB2 loader (exposed for tests).
// Handles quoted fields, doubled quotes and embedded newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace seidr
