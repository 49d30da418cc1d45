#include "seidr/repair.hpp"

#include "seidr/synthesize.hpp"

namespace seidr {

std::string render_debug_prompt(const Problem& problem, const Candidate& parent,
                                const std::string& instruction, const PromptTemplate& templates) {
  SlotValues values{
      {"language", to_string(problem.language)},
      {"problem_name", problem.name},
      {"problem_description", problem.description},
      {"program_candidate", parent.source},
      {"bug_summary", instruction},
  };
  return render_template(templates.debug, values);
}

std::vector<Candidate> repair(const Problem& problem, const Candidate& parent,
                              const std::string& instruction, int n_debug,
                              const PromptTemplate& templates, ModelBackend& backend, int limit) {
  ModelRequest request;
  request.system_message =
      render_template(templates.system_message, {{"language", to_string(problem.language)}});
  request.user_message = render_debug_prompt(problem, parent, instruction, templates);
  request.max_tokens = default_max_tokens(ModelRole::debug);
  request.role = ModelRole::debug;

  auto responses = generate_batch(request, n_debug, backend, limit);

  std::vector<Candidate> children;
  children.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    Candidate child;
    child.parent_id = parent.id;
    child.generation = parent.generation + 1;
    child.origin = CandidateOrigin::repair;
    child.instruction = instruction;
    child.temperature = temperature_for(static_cast<int>(i) + 1, n_debug);
    child.source = extract_code(responses[i].text, problem.language);
    children.push_back(std::move(child));
  }
  return children;
}

}  // namespace seidr
