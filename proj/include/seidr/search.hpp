#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seidr/core.hpp"
#include "seidr/execute.hpp"
#include "seidr/llm.hpp"
#include "seidr/log.hpp"
#include "seidr/templates.hpp"

namespace seidr {

enum class InstructMode { llm, static_template };

std::string to_string(InstructMode mode);
InstructMode instruct_mode_from_string(const std::string& text);

struct SearchResult {
  bool solved = false;  // a validation-perfect candidate was found
  std::optional<Candidate> solution;
  int programs_generated = 0;
  std::optional<int> epg;
  std::optional<double> final_tpr;  // held-out pass rate of the solution
  int generations = 0;
  std::string log_path;
  double best_validation_score = 0.0;
  double last_validation_score = 0.0;
  bool aborted = false;
  std::string error;
};

// Everything around one solve call that is not a search hyperparameter.
struct RunContext {
  std::string run_id;  // derived from problem/config/seed when empty
  std::string dataset = "adhoc";
  std::string model;  // defaults to the synth backend id
  int repeat = 0;
  std::string log_path = "seidr_run.jsonl";
  std::string scratch_dir = "seidr_scratch";
  InstructMode instruct_mode = InstructMode::llm;
  PromptTemplate templates = PromptTemplate::defaults();
  ToolchainConfig toolchain;
  int workers = 1;
  // Wall-clock timestamps make identical runs differ byte-wise; replayable
  // backends turn them off so identical (flags, seed, fixture) give identical
  // logs.
  bool wall_clock_timestamps = true;
  std::size_t instruction_byte_cap = 4096;
};

// One full search: drafts, then evaluate / instruct / repair / rank rounds
// until a candidate passes every validation case or the budget M is spent.
// Candidates are evaluated in creation (id) order and the stop check fires
// per candidate, so the first validation-perfect candidate's id is the
// excess-programs count. The solution is then re-run on the held-out tests
// for the final pass rate. Sandbox and backend failures abort the run with a
// terminal "aborted" record and rethrow.
SearchResult solve(const Problem& problem, const SearchConfig& config, const BackendSet& backends,
                   const RunContext& context);

// Shares an already-open log across runs (used by run_matrix and tests).
SearchResult solve(const Problem& problem, const SearchConfig& config, const BackendSet& backends,
                   const RunContext& context, JsonlWriter& writer);

using BackendFactory = std::function<BackendSet(std::uint64_t seed)>;

// Runs every problem x config x repeat cell with derived seeds
// (config.seed + repeat), streaming results into one shared log as they
// complete. A failed cell is recorded as aborted and the matrix continues.
std::vector<SearchResult> run_matrix(const std::vector<Problem>& problems,
                                     const std::vector<SearchConfig>& configs, int repeats,
                                     const BackendFactory& make_backends,
                                     const RunContext& base_context);

}  // namespace seidr
