#include "seidr/synthesize.hpp"

#include <algorithm>
#include <sstream>

namespace seidr {

namespace {

std::vector<std::string> split_into_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  lines.push_back(current);
  return lines;
}

void append_commented(std::ostringstream& out, const std::string& marker,
                      const std::vector<std::string>& lines) {
  for (const auto& line : lines) {
    out << marker << ' ' << line << '\n';
  }
}

bool is_fence_line(const std::string& line) {
  std::size_t start = line.find_first_not_of(" \t");
  if (start == std::string::npos) return false;
  return line.compare(start, 3, "```") == 0;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t first,
                       std::size_t last_exclusive) {
  std::string out;
  for (std::size_t i = first; i < last_exclusive; ++i) {
    if (i > first) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string build_program_template(const Problem& problem, const PromptTemplate& templates) {
  const std::string marker = problem.language == Language::python ? "#" : "//";
  std::ostringstream out;
  out << templates.preamble(problem.language);
  if (!templates.preamble(problem.language).empty() &&
      templates.preamble(problem.language).back() != '\n') {
    out << '\n';
  }
  std::size_t count = std::min(problem.prompt_cases.size(), kMaxPromptCases);
  for (std::size_t i = 0; i < count; ++i) {
    const TestCase& test = problem.prompt_cases[i];
    if (test.kind == CaseKind::io_pair) {
      out << marker << " input:\n";
      append_commented(out, marker, test.input_lines);
      out << marker << " output:\n";
      append_commented(out, marker, test.expected_output_lines);
    } else {
      out << marker << " test:\n";
      append_commented(out, marker, split_into_lines(test.snippet));
    }
  }
  return out.str();
}

std::pair<std::string, std::string> render_draft_prompt(const Problem& problem,
                                                        const PromptTemplate& templates) {
  if (problem.prompt_cases.empty()) {
    throw TemplateError("problem " + problem.id + " has no prompt cases");
  }
  SlotValues values{
      {"language", to_string(problem.language)},
      {"problem_name", problem.name},
      {"problem_description", problem.description},
      {"program_template", build_program_template(problem, templates)},
  };
  std::string system_message = render_template(templates.system_message, values);
  std::string user_message = render_template(templates.draft, values);
  return {std::move(system_message), std::move(user_message)};
}

std::string extract_code(const std::string& raw, Language /*language*/) {
  std::vector<std::string> lines = split_into_lines(raw);
  std::size_t open = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_fence_line(lines[i])) {
      open = i;
      break;
    }
  }
  if (open == lines.size()) return raw;  // no fence: passthrough

  std::size_t close = lines.size();
  for (std::size_t i = open + 1; i < lines.size(); ++i) {
    if (is_fence_line(lines[i])) {
      close = i;
      break;
    }
  }
  // Unclosed fence: take everything after the opening line.
  return join_lines(lines, open + 1, close);
}

std::vector<Candidate> synthesize_drafts(const Problem& problem, const SearchConfig& config,
                                         const PromptTemplate& templates, ModelBackend& backend) {
  auto [system_message, user_message] = render_draft_prompt(problem, templates);
  ModelRequest request;
  request.system_message = std::move(system_message);
  request.user_message = std::move(user_message);
  request.max_tokens = default_max_tokens(ModelRole::synth);
  request.role = ModelRole::synth;

  int count = std::min(config.n_draft, config.max_programs);
  auto responses = generate_batch(request, config.n_draft, backend, count);

  std::vector<Candidate> drafts;
  drafts.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    Candidate draft;
    draft.id = static_cast<int>(i);
    draft.generation = 0;
    draft.origin = CandidateOrigin::draft;
    draft.temperature = temperature_for(static_cast<int>(i) + 1, config.n_draft);
    draft.source = extract_code(responses[i].text, problem.language);
    drafts.push_back(std::move(draft));
  }
  return drafts;
}

}  // namespace seidr
