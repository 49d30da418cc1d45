#include "seidr/instruct.hpp"

namespace seidr {

namespace {

std::string join(const std::vector<std::string>& lines, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += sep;
    out += lines[i];
  }
  return out;
}

// The issue clause of the explain prompt: stderr when present, otherwise the
// expected-vs-actual sentence for the failing I/O pair.
std::string issue_clause(const FailingCase& failing, std::size_t byte_cap) {
  if (!failing.outcome.stderr_text.empty()) {
    return truncate_for_prompt(failing.outcome.stderr_text, byte_cap);
  }
  if (failing.test.kind == CaseKind::assertion) {
    return "the following test fails: " + truncate_for_prompt(failing.test.snippet, byte_cap);
  }
  return "it must return " + join(failing.test.expected_output_lines, "\n") + " for input " +
         join(failing.test.input_lines, "\n") + ", but it returns " +
         truncate_for_prompt(join(failing.outcome.stdout_lines, "\n"), byte_cap);
}

}  // namespace

std::string truncate_for_prompt(const std::string& text, std::size_t cap) {
  if (text.size() <= cap) return text;
  return text.substr(0, cap) + "...";
}

std::optional<FailingCase> first_failing(const EvaluationRecord& record,
                                         const std::vector<TestCase>& cases) {
  for (std::size_t i = 0; i < record.scores.size() && i < cases.size(); ++i) {
    if (record.scores[i] < 1.0) {
      return FailingCase{i, cases[i], record.outcomes[i]};
    }
  }
  return std::nullopt;
}

std::string static_instruction(const ExecutionOutcome& outcome, const TestCase& test,
                               std::size_t byte_cap) {
  if (!outcome.stderr_text.empty()) {
    return "Fix " + truncate_for_prompt(outcome.stderr_text, byte_cap);
  }
  if (test.kind == CaseKind::assertion) {
    return "Make sure that the following test passes: " +
           truncate_for_prompt(test.snippet, byte_cap);
  }
  return "Make sure that " + join(test.input_lines, "\\n") + " -> " +
         join(test.expected_output_lines, "\\n");
}

std::string render_explain_prompt(const Problem& problem, const Candidate& candidate,
                                  const FailingCase& failing, const PromptTemplate& templates,
                                  std::size_t byte_cap) {
  SlotValues values{
      {"language", to_string(problem.language)},
      {"problem_name", problem.name},
      {"problem_description", problem.description},
      {"program_candidate", candidate.source},
      {"issue", issue_clause(failing, byte_cap)},
  };
  return render_template(templates.explain, values);
}

std::vector<std::string> llm_instructions(const Problem& problem, const Candidate& candidate,
                                          const FailingCase& failing, int n_explain,
                                          const PromptTemplate& templates, ModelBackend& backend,
                                          std::size_t byte_cap) {
  ModelRequest request;
  request.system_message =
      render_template(templates.system_message, {{"language", to_string(problem.language)}});
  request.user_message = render_explain_prompt(problem, candidate, failing, templates, byte_cap);
  request.max_tokens = default_max_tokens(ModelRole::explain);
  request.role = ModelRole::explain;

  auto responses = generate_batch(request, n_explain, backend);
  std::vector<std::string> instructions;
  instructions.reserve(responses.size());
  for (const auto& response : responses) {
    if (response.text.empty()) {
      instructions.push_back(static_instruction(failing.outcome, failing.test, byte_cap));
    } else {
      instructions.push_back(response.text);
    }
  }
  return instructions;
}

}  // namespace seidr
