#pragma once

#include <string>
#include <utility>
#include <vector>

#include "seidr/core.hpp"
#include "seidr/llm.hpp"
#include "seidr/templates.hpp"

namespace seidr {

// Maximum number of prompt cases rendered into the draft program template.
inline constexpr std::size_t kMaxPromptCases = 5;

// Builds the code block handed to the draft model: the language preamble
// followed by up to kMaxPromptCases prompt cases rendered as comments.
std::string build_program_template(const Problem& problem, const PromptTemplate& templates);

// Renders the (system message, user message) pair for the draft model.
// Requires at least one prompt case.
std::pair<std::string, std::string> render_draft_prompt(const Problem& problem,
                                                        const PromptTemplate& templates);

// Strips a surrounding markdown code fence (and its optional language tag)
// plus any prose outside the first fenced block. Text without a fence passes
// through unchanged. Idempotent.
std::string extract_code(const std::string& raw, Language language);

// Samples min(n_draft, max_programs) draft candidates at the spring-schedule
// temperatures computed over n_draft. Candidates carry ids 0..k-1,
// generation 0 and origin draft.
std::vector<Candidate> synthesize_drafts(const Problem& problem, const SearchConfig& config,
                                         const PromptTemplate& templates, ModelBackend& backend);

}  // namespace seidr
