#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seidr/core.hpp"
#include "seidr/execute.hpp"
#include "seidr/llm.hpp"
#include "seidr/templates.hpp"

namespace seidr {

// Default byte cap applied to stderr and captured output before they are
// pasted into an instruction or prompt.
inline constexpr std::size_t kInstructionByteCap = 4096;

// Truncates to `cap` bytes, appending "..." when anything was cut.
std::string truncate_for_prompt(const std::string& text, std::size_t cap = kInstructionByteCap);

struct FailingCase {
  std::size_t index = 0;
  TestCase test;
  ExecutionOutcome outcome;
};

// The lowest-index case scored below 1, with its captured outcome; nullopt
// when the candidate passes everything.
std::optional<FailingCase> first_failing(const EvaluationRecord& record,
                                         const std::vector<TestCase>& cases);

// Fixed-template instruction: "Fix {stderr}" when stderr is non-empty,
// otherwise "Make sure that {input} -> {expected_output}" with the failing
// case's lines joined by a literal "\n".
std::string static_instruction(const ExecutionOutcome& outcome, const TestCase& test,
                               std::size_t byte_cap = kInstructionByteCap);

// Samples n_explain bug summaries from the explain model over the failing
// case. An empty completion falls back to the static instruction for that
// slot.
std::vector<std::string> llm_instructions(const Problem& problem, const Candidate& candidate,
                                          const FailingCase& failing, int n_explain,
                                          const PromptTemplate& templates, ModelBackend& backend,
                                          std::size_t byte_cap = kInstructionByteCap);

// The user message sent to the explain model (exposed for tests).
std::string render_explain_prompt(const Problem& problem, const Candidate& candidate,
                                  const FailingCase& failing, const PromptTemplate& templates,
                                  std::size_t byte_cap = kInstructionByteCap);

}  // namespace seidr
