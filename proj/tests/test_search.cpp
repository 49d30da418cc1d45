#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "seidr/metrics.hpp"
#include "seidr/search.hpp"

using namespace seidr;

namespace {

std::string unique_path(const std::string& tag, const std::string& suffix) {
  static int counter = 0;
  auto path = std::filesystem::temp_directory_path() /
              ("seidr_search_" + tag + "_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++) + suffix);
  return path.string();
}

Problem echo_problem(const std::string& id = "echo") {
  Problem problem;
  problem.id = id;
  problem.name = id;
  problem.description = "Read one line from stdin and print it back";
  problem.language = Language::python;
  problem.validation_cases = {TestCase::io({"x"}, {"x"})};
  problem.test_cases = {TestCase::io({"y"}, {"y"}), TestCase::io({"zz"}, {"zz"})};
  problem.prompt_cases = problem.validation_cases;
  return problem;
}

const char* kRight = "print(input())";
const char* kWrong = "print('nope')";

BackendSet scripted(ScriptedBackend::Script script, std::uint64_t seed = 0) {
  return BackendSet::shared(std::make_shared<ScriptedBackend>(std::move(script), seed));
}

ScriptedBackend::Script never_correct() {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kWrong};
  script[ModelRole::explain] = {"make it echo the input"};
  script[ModelRole::debug] = {kWrong};
  return script;
}

RunContext test_context(const std::string& tag) {
  RunContext context;
  context.log_path = unique_path(tag, ".jsonl");
  context.scratch_dir = unique_path(tag, "_scratch");
  context.wall_clock_timestamps = false;
  return context;
}

SearchConfig basic_config(int n_draft, int beam, int n_explain, int n_debug, int budget) {
  SearchConfig config;
  config.n_draft = n_draft;
  config.beam_width = beam;
  config.n_explain = n_explain;
  config.n_debug = n_debug;
  config.max_programs = budget;
  config.exec_limits.run_timeout = 5.0;
  return config;
}

}  // namespace

TEST_CASE("a correct first draft solves with zero excess programs") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kRight};
  auto backends = scripted(script);

  auto context = test_context("draft0");
  auto result = solve(echo_problem(), basic_config(1, 1, 1, 1, 10), backends, context);

  CHECK(result.solved);
  REQUIRE(result.epg.has_value());
  CHECK(*result.epg == 0);
  CHECK(result.programs_generated == 1);
  CHECK(result.generations == 1);
  REQUIRE(result.final_tpr.has_value());
  CHECK(*result.final_tpr == 1.0);
  REQUIRE(result.solution.has_value());
  CHECK(result.solution->source == kRight);
}

TEST_CASE("wrong draft repaired on the first attempt gives epg 1 over two generations") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kWrong};
  script[ModelRole::explain] = {"echo stdin instead of a constant"};
  script[ModelRole::debug] = {kRight};
  auto backends = scripted(script);

  auto context = test_context("repair1");
  auto result = solve(echo_problem(), basic_config(1, 1, 1, 1, 10), backends, context);

  CHECK(result.solved);
  CHECK(*result.epg == 1);
  CHECK(result.generations == 2);
  CHECK(*result.final_tpr == 1.0);
  CHECK(result.solution->origin == CandidateOrigin::repair);
  CHECK(result.solution->parent_id == 0);
  CHECK(result.solution->instruction == "echo stdin instead of a constant");
}

TEST_CASE("budget exhaustion reports an unsolved run with best and last scores") {
  auto backends = scripted(never_correct());
  auto context = test_context("exhaust");
  auto result = solve(echo_problem(), basic_config(1, 1, 1, 1, 20), backends, context);

  CHECK_FALSE(result.solved);
  CHECK_FALSE(result.epg.has_value());
  CHECK_FALSE(result.final_tpr.has_value());
  CHECK(result.programs_generated == 20);
  CHECK(result.best_validation_score == 0.0);
  CHECK(result.last_validation_score == 0.0);
}

TEST_CASE("repair-only configuration builds a linear chain") {
  auto backends = scripted(never_correct());
  auto context = test_context("chain");
  auto result = solve(echo_problem(), basic_config(1, 1, 1, 1, 20), backends, context);
  CHECK(result.programs_generated == 20);

  auto logs = read_run_logs({context.log_path});
  REQUIRE(logs.size() == 1);
  const auto& candidates = logs[0].candidates;
  REQUIRE(candidates.size() == 20);
  for (int i = 0; i < 20; ++i) {
    const auto& record = candidates[static_cast<std::size_t>(i)];
    CHECK(record.candidate_id == i);
    if (i == 0) {
      CHECK_FALSE(record.parent_id.has_value());
      CHECK(record.origin == "draft");
    } else {
      REQUIRE(record.parent_id.has_value());
      CHECK(*record.parent_id == i - 1);
      CHECK(record.generation == i);
      CHECK(record.origin == "repair");
    }
  }
}

TEST_CASE("draft-only configuration is a single generation with no repairs") {
  auto backends = scripted(never_correct());
  auto context = test_context("breadth");
  auto result = solve(echo_problem(), basic_config(20, kInfArity, 1, 1, 20), backends, context);

  CHECK_FALSE(result.solved);
  CHECK(result.programs_generated == 20);
  CHECK(result.generations == 1);

  auto logs = read_run_logs({context.log_path});
  for (const auto& record : logs[0].candidates) {
    CHECK(record.origin == "draft");
    CHECK(record.generation == 0);
  }
}

TEST_CASE("stop on success leaves no candidate after the solution in the log") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kWrong, kWrong, kRight, kWrong};
  auto backends = scripted(script);
  auto context = test_context("stop");
  auto result = solve(echo_problem(), basic_config(10, 10, 1, 1, 10), backends, context);

  CHECK(result.solved);
  CHECK(*result.epg == 2);
  CHECK(result.programs_generated == 3);

  auto logs = read_run_logs({context.log_path});
  REQUIRE(logs.size() == 1);
  for (const auto& record : logs[0].candidates) {
    CHECK(record.candidate_id <= *result.epg);
  }
  REQUIRE(logs[0].result.has_value());
  CHECK(logs[0].result->solved);
  CHECK(logs[0].result->epg == 2);
}

TEST_CASE("generation sizes follow fan-out and budget truncation") {
  auto backends = scripted(never_correct());
  auto context = test_context("fanout");
  // gen0: 2 drafts, then W=2 parents x 2 explanations x 2 repairs = 8 per
  // generation, truncated to 4 at the 30-program budget.
  auto result = solve(echo_problem(), basic_config(2, 2, 2, 2, 30), backends, context);
  CHECK(result.programs_generated == 30);

  auto logs = read_run_logs({context.log_path});
  std::map<int, int> sizes;
  for (const auto& record : logs[0].candidates) sizes[record.generation]++;
  CHECK(sizes == std::map<int, int>{{0, 2}, {1, 8}, {2, 8}, {3, 8}, {4, 4}});
  CHECK(result.generations == 5);
}

TEST_CASE("lexicase selection drives the loop and stays replayable") {
  auto config = basic_config(4, 2, 1, 2, 16);
  config.selection = Selection::lexicase;
  config.seed = 3;

  auto context_a = test_context("lex_a");
  auto result_a = solve(echo_problem(), config, scripted(never_correct(), 3), context_a);
  CHECK_FALSE(result_a.solved);
  CHECK(result_a.programs_generated == 16);

  auto context_b = test_context("lex_b");
  solve(echo_problem(), config, scripted(never_correct(), 3), context_b);
  std::ifstream a(context_a.log_path), b(context_b.log_path);
  std::string text_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string text_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(text_a == text_b);
}

TEST_CASE("solve rejects a problem without validation cases") {
  Problem problem = echo_problem();
  problem.validation_cases.clear();
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kRight};
  auto context = test_context("noval");
  CHECK_THROWS_AS(solve(problem, basic_config(1, 1, 1, 1, 5), scripted(script), context),
                  DatasetError);
}

TEST_CASE("static instruct mode runs without an explain backend") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kWrong};
  script[ModelRole::debug] = {kRight};  // no explain entries at all
  auto backends = scripted(script);

  auto context = test_context("static");
  context.instruct_mode = InstructMode::static_template;
  auto result = solve(echo_problem(), basic_config(1, 1, 1, 1, 10), backends, context);
  CHECK(result.solved);
  CHECK(*result.epg == 1);

  auto logs = read_run_logs({context.log_path});
  REQUIRE(logs[0].candidates.size() == 2);
  CHECK(logs[0].candidates[1].instruction == "Make sure that x -> x");
}

TEST_CASE("identical scripted runs produce byte-identical logs") {
  auto context_a = test_context("det_a");
  auto context_b = test_context("det_b");
  auto config = basic_config(2, 2, 1, 1, 6);

  solve(echo_problem(), config, scripted(never_correct(), 5), context_a);
  solve(echo_problem(), config, scripted(never_correct(), 5), context_b);

  std::ifstream a(context_a.log_path), b(context_b.log_path);
  std::string text_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string text_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(text_a == text_b);
  CHECK_FALSE(text_a.empty());
}

TEST_CASE("solution failing held-out tests is flagged but still stops the search") {
  Problem problem = echo_problem();
  // held-out tests demand two echoed lines; print(input()) echoes only one
  problem.test_cases = {TestCase::io({"a", "b"}, {"a", "b"})};
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kRight};
  auto context = test_context("valonly");
  auto result = solve(problem, basic_config(1, 1, 1, 1, 5), scripted(script), context);

  CHECK(result.solved);  // validation-perfect
  REQUIRE(result.final_tpr.has_value());
  CHECK(*result.final_tpr < 1.0);
}

TEST_CASE("run_matrix runs every cell with derived seeds and one shared log") {
  std::vector<Problem> problems{echo_problem("echo-a"), echo_problem("echo-b")};
  auto config = basic_config(1, 1, 1, 1, 2);
  config.seed = 100;

  std::vector<std::uint64_t> seeds_seen;
  BackendFactory factory = [&](std::uint64_t seed) {
    seeds_seen.push_back(seed);
    return scripted(never_correct(), seed);
  };

  auto context = test_context("matrix");
  auto results = run_matrix(problems, {config}, 6, factory, context);
  CHECK(results.size() == 12);
  REQUIRE(seeds_seen.size() == 12);
  for (int repeat = 0; repeat < 6; ++repeat) {
    CHECK(seeds_seen[static_cast<std::size_t>(repeat)] == 100u + static_cast<unsigned>(repeat));
  }

  auto logs = read_run_logs({context.log_path});
  CHECK(logs.size() == 12);
  for (const auto& log : logs) {
    REQUIRE(log.result.has_value());
    CHECK(log.result->status == "completed");
  }
}

TEST_CASE("run_matrix crosses problems with every config") {
  std::vector<Problem> problems{echo_problem("echo-a"), echo_problem("echo-b")};
  auto narrow = basic_config(1, 1, 1, 1, 2);
  auto wide = basic_config(2, 2, 1, 1, 2);
  BackendFactory factory = [](std::uint64_t seed) { return scripted(never_correct(), seed); };

  auto context = test_context("grid");
  auto results = run_matrix(problems, {narrow, wide}, 2, factory, context);
  CHECK(results.size() == 8);  // 2 problems x 2 configs x 2 repeats

  auto logs = read_run_logs({context.log_path});
  CHECK(logs.size() == 8);
  int narrow_runs = 0, wide_runs = 0;
  for (const auto& log : logs) {
    REQUIRE(log.result.has_value());
    (log.result->n_draft == 1 ? narrow_runs : wide_runs)++;
  }
  CHECK(narrow_runs == 4);
  CHECK(wide_runs == 4);
}

TEST_CASE("a failing cell is recorded and the matrix continues") {
  std::vector<Problem> problems{echo_problem("echo-a"), echo_problem("echo-b")};
  auto config = basic_config(1, 1, 1, 1, 2);

  int calls = 0;
  BackendFactory factory = [&](std::uint64_t seed) -> BackendSet {
    ++calls;
    if (calls == 1) {
      // a backend with no entries aborts its run immediately
      return scripted(ScriptedBackend::Script{}, seed);
    }
    return scripted(never_correct(), seed);
  };

  auto context = test_context("partial");
  auto results = run_matrix(problems, {config}, 1, factory, context);
  REQUIRE(results.size() == 2);
  CHECK(results[0].aborted);
  CHECK_FALSE(results[1].aborted);

  auto logs = read_run_logs({context.log_path});
  REQUIRE(logs.size() == 2);
  CHECK(logs[0].result->status == "aborted");
  CHECK(logs[1].result->status == "completed");
}

TEST_CASE("log records carry the versioned schema fields") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kRight};
  auto context = test_context("schema");
  context.dataset = "psb2";
  solve(echo_problem(), basic_config(1, 1, 1, 1, 5), scripted(script), context);

  std::ifstream in(context.log_path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.find("\"schema\":1") != std::string::npos);
  CHECK(line.find("\"type\":\"candidate\"") != std::string::npos);
  CHECK(line.find("\"source_digest\"") != std::string::npos);
  REQUIRE(std::getline(in, line));
  CHECK(line.find("\"type\":\"result\"") != std::string::npos);
  CHECK(line.find("\"final_tpr\":1.0") != std::string::npos);
  CHECK(line.find("\"dataset\":\"psb2\"") != std::string::npos);
}

TEST_CASE("search result epg matches the metrics pass@k boundary") {
  ScriptedBackend::Script script;
  script[ModelRole::synth] = {kWrong, kWrong, kWrong, kWrong, kWrong, kRight};
  auto context = test_context("epg5");
  auto result = solve(echo_problem(), basic_config(10, 10, 1, 1, 10), scripted(script), context);

  CHECK(result.solved);
  CHECK(*result.epg == 5);

  auto logs = read_run_logs({context.log_path});
  REQUIRE(logs.size() == 1);
  CHECK(epg_of(logs[0]) == 5);
  CHECK_FALSE(run_passes_at(logs[0], 5));
  CHECK(run_passes_at(logs[0], 6));
}
