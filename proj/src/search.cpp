#include "seidr/search.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "seidr/instruct.hpp"
#include "seidr/metrics.hpp"
#include "seidr/rank.hpp"
#include "seidr/repair.hpp"
#include "seidr/synthesize.hpp"

namespace seidr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

std::string sanitize(const std::string& text) {
  std::string out;
  for (char c : text) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return out;
}

std::string default_run_id(const Problem& problem, const SearchConfig& config, int repeat) {
  return problem.id + "|d" + std::to_string(config.n_draft) + "e" +
         std::to_string(config.n_explain) + "b" + std::to_string(config.n_debug) + "w" +
         std::to_string(config.beam_width) + "m" + std::to_string(config.max_programs) + "|" +
         to_string(config.selection) + "|s" + std::to_string(config.seed) + "r" +
         std::to_string(repeat);
}

struct Member {
  Candidate candidate;
  EvaluationRecord record;
};

class SolveSession {
 public:
  SolveSession(const Problem& problem, SearchConfig config, const BackendSet& backends,
               const RunContext& context, JsonlWriter& writer)
      : problem_(problem),
        config_(config),
        backends_(backends),
        context_(context),
        writer_(writer),
        run_id_(context.run_id.empty() ? default_run_id(problem, config_, context.repeat)
                                       : context.run_id),
        runner_(problem.language, config_.exec_limits,
                (std::filesystem::path(context.scratch_dir) / sanitize(run_id_)).string(),
                context.toolchain, context.workers) {}

  SearchResult run() {
    auto drafts = synthesize_drafts(problem_, config_, context_.templates, *backends_.synth);
    generations_ = 1;
    std::vector<Member> population;
    for (auto& draft : drafts) {
      if (register_candidate(std::move(draft), population)) return finish_solved();
    }

    while (counter_ < config_.max_programs) {
      std::vector<Candidate> pool;
      pool.reserve(population.size());
      for (const auto& member : population) pool.push_back(member.candidate);
      std::vector<Candidate> parents =
          config_.selection == Selection::tournament
              ? tournament_select(pool, config_.beam_width)
              : lexicase_select(pool, config_.beam_width,
                                derive_seed(config_.seed, static_cast<std::uint64_t>(generations_)));

      std::vector<Member> next_population;
      ++generations_;
      for (const auto& parent : parents) {
        if (counter_ >= config_.max_programs) break;
        const Member* member = find_member(population, parent.id);
        if (member == nullptr) continue;
        auto failing = first_failing(member->record, problem_.validation_cases);
        if (!failing) continue;  // perfect parents stop the run earlier

        std::vector<std::string> instructions;
        if (context_.instruct_mode == InstructMode::llm) {
          instructions = llm_instructions(problem_, member->candidate, *failing, config_.n_explain,
                                          context_.templates, *backends_.explain,
                                          context_.instruction_byte_cap);
        } else {
          instructions.assign(
              static_cast<std::size_t>(config_.n_explain),
              static_instruction(failing->outcome, failing->test, context_.instruction_byte_cap));
        }

        for (const auto& instruction : instructions) {
          int remaining = config_.max_programs - counter_;
          if (remaining <= 0) break;
          auto children = repair(problem_, member->candidate, instruction, config_.n_debug,
                                 context_.templates, *backends_.debug, remaining);
          for (auto& child : children) {
            if (register_candidate(std::move(child), next_population)) return finish_solved();
          }
        }
      }
      if (next_population.empty()) break;
      population = std::move(next_population);
    }
    return finish_exhausted();
  }

 private:
  static const Member* find_member(const std::vector<Member>& population, int id) {
    for (const auto& member : population) {
      if (member.candidate.id == id) return &member;
    }
    return nullptr;
  }

  // Assigns the next id, evaluates on the validation cases, logs the
  // candidate and either stores it as the solution (returning true) or adds
  // it to the growing generation.
  bool register_candidate(Candidate candidate, std::vector<Member>& generation) {
    candidate.id = counter_++;
    EvaluationRecord record = runner_.evaluate(candidate, problem_.validation_cases);
    log_candidate(candidate);
    best_validation_ = std::max(best_validation_, record.avg);
    last_validation_ = record.avg;
    if (candidate.validation_perfect()) {
      solution_ = candidate;
      return true;
    }
    generation.push_back(Member{std::move(candidate), std::move(record)});
    return false;
  }

  void log_candidate(const Candidate& candidate) {
    CandidateRecord record;
    record.run_id = run_id_;
    record.problem_id = problem_.id;
    record.candidate_id = candidate.id;
    record.parent_id = candidate.parent_id;
    record.generation = candidate.generation;
    record.origin = to_string(candidate.origin);
    record.temperature = candidate.temperature;
    record.instruction = candidate.instruction;
    record.source_digest = fnv1a64_hex(candidate.source);
    record.per_test_scores = candidate.per_test_scores.value_or(std::vector<double>{});
    record.avg_score = candidate.avg_score.value_or(0.0);
    writer_.write(std::move(record));
  }

  RunRecord base_run_record() const {
    RunRecord record;
    record.run_id = run_id_;
    record.problem_id = problem_.id;
    record.dataset = context_.dataset;
    record.language = to_string(problem_.language);
    record.model = context_.model.empty() ? backends_.synth->id() : context_.model;
    record.beam_width = config_.beam_width;
    record.n_draft = config_.n_draft;
    record.n_explain = config_.n_explain;
    record.n_debug = config_.n_debug;
    record.max_programs = config_.max_programs;
    record.selection = to_string(config_.selection);
    record.seed = config_.seed;
    record.repeat = context_.repeat;
    record.programs_generated = counter_;
    record.generations = generations_;
    record.best_validation_score = best_validation_;
    record.last_validation_score = last_validation_;
    return record;
  }

  SearchResult base_result() const {
    SearchResult result;
    result.programs_generated = counter_;
    result.generations = generations_;
    result.log_path = writer_.path();
    result.best_validation_score = best_validation_;
    result.last_validation_score = last_validation_;
    return result;
  }

  SearchResult finish_solved() {
    // Held-out verdict: re-run the solution on the test split (falling back
    // to the validation cases when the dataset has no separate split).
    const auto& final_cases =
        problem_.test_cases.empty() ? problem_.validation_cases : problem_.test_cases;
    Candidate probe = *solution_;
    EvaluationRecord final_record = runner_.evaluate(probe, final_cases);
    double final_tpr = tpr(final_record.scores);

    SearchResult result = base_result();
    result.solved = true;
    result.solution = solution_;
    result.epg = solution_->id;
    result.final_tpr = final_tpr;

    RunRecord record = base_run_record();
    record.solved = true;
    record.epg = result.epg;
    record.final_tpr = final_tpr;
    writer_.write(std::move(record));
    return result;
  }

  SearchResult finish_exhausted() {
    SearchResult result = base_result();
    RunRecord record = base_run_record();
    writer_.write(std::move(record));
    return result;
  }

 public:
  void record_abort(const std::string& message) {
    RunRecord record = base_run_record();
    record.status = "aborted";
    record.error = message;
    writer_.write(std::move(record));
  }

  SearchResult aborted_result(const std::string& message) {
    SearchResult result = base_result();
    result.aborted = true;
    result.error = message;
    return result;
  }

 private:
  const Problem& problem_;
  SearchConfig config_;
  const BackendSet& backends_;
  const RunContext& context_;
  JsonlWriter& writer_;
  std::string run_id_;
  Runner runner_;
  int counter_ = 0;
  int generations_ = 0;
  double best_validation_ = 0.0;
  double last_validation_ = 0.0;
  std::optional<Candidate> solution_;
};

}  // namespace

std::string to_string(InstructMode mode) {
  return mode == InstructMode::llm ? "llm" : "static";
}

InstructMode instruct_mode_from_string(const std::string& text) {
  if (text == "llm") return InstructMode::llm;
  if (text == "static" || text == "static_template") return InstructMode::static_template;
  throw ConfigError("unknown instruct mode: " + text);
}

SearchResult solve(const Problem& problem, const SearchConfig& config, const BackendSet& backends,
                   const RunContext& context, JsonlWriter& writer) {
  SearchConfig validated = validate_config(config);
  if (problem.validation_cases.empty()) {
    throw DatasetError("problem " + problem.id + " has no validation cases");
  }
  SolveSession session(problem, validated, backends, context, writer);
  try {
    return session.run();
  } catch (const SandboxError& e) {
    session.record_abort(e.what());
    throw;
  } catch (const BackendError& e) {
    session.record_abort(e.what());
    throw;
  } catch (const TimeoutError& e) {
    session.record_abort(e.what());
    throw;
  }
}

SearchResult solve(const Problem& problem, const SearchConfig& config, const BackendSet& backends,
                   const RunContext& context) {
  JsonlWriter writer(context.log_path, context.wall_clock_timestamps);
  return solve(problem, config, backends, context, writer);
}

std::vector<SearchResult> run_matrix(const std::vector<Problem>& problems,
                                     const std::vector<SearchConfig>& configs, int repeats,
                                     const BackendFactory& make_backends,
                                     const RunContext& base_context) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  JsonlWriter writer(base_context.log_path, base_context.wall_clock_timestamps);
  std::vector<SearchResult> results;
  for (const auto& problem : problems) {
    for (const auto& config : configs) {
      for (int repeat = 0; repeat < repeats; ++repeat) {
        SearchConfig cell_config = config;
        cell_config.seed = config.seed + static_cast<std::uint64_t>(repeat);
        RunContext context = base_context;
        context.repeat = repeat;
        context.run_id = base_context.run_id.empty()
                             ? default_run_id(problem, cell_config, repeat)
                             : base_context.run_id + "|" + default_run_id(problem, cell_config, repeat);
        BackendSet backends = make_backends(cell_config.seed);
        try {
          results.push_back(solve(problem, cell_config, backends, context, writer));
        } catch (const std::runtime_error& e) {
          SearchResult failed;
          failed.aborted = true;
          failed.error = e.what();
          failed.log_path = base_context.log_path;
          results.push_back(std::move(failed));
        }
      }
    }
  }
  return results;
}

}  // namespace seidr
