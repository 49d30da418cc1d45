#pragma once

#include <string>
#include <vector>

#include "seidr/core.hpp"
#include "seidr/llm.hpp"
#include "seidr/templates.hpp"

namespace seidr {

// Samples repaired children of `parent` from the debug model, one completion
// per spring-schedule temperature over n_debug. Children carry
// generation = parent.generation + 1, the parent id, origin repair and the
// instruction that produced them; ids are assigned later by the search loop.
// `limit` (when >= 0) stops creation early at a budget boundary. Duplicate
// sources are kept; deduplication is a ranking concern, not a repair one.
std::vector<Candidate> repair(const Problem& problem, const Candidate& parent,
                              const std::string& instruction, int n_debug,
                              const PromptTemplate& templates, ModelBackend& backend,
                              int limit = -1);

// The user message sent to the debug model (exposed for tests).
std::string render_debug_prompt(const Problem& problem, const Candidate& parent,
                                const std::string& instruction, const PromptTemplate& templates);

}  // namespace seidr
