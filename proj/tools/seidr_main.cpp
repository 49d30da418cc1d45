#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seidr/bench.hpp"
#include "seidr/core.hpp"
#include "seidr/errors.hpp"
#include "seidr/llm.hpp"
#include "seidr/metrics.hpp"
#include "seidr/search.hpp"

namespace {

using seidr::SearchConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

struct CommonFlags {
  std::string config_file;
  std::string beam_width;
  std::string n_draft;
  int n_explain = -1;
  int n_debug = -1;
  long long max_programs = -1;
  std::string selection;
  long long seed = -1;
  double run_timeout = -1;
  double compile_timeout = -1;
  int max_output_lines = -1;

  std::string dataset = "psb2";
  std::string data_root;
  std::string language = "python";
  int n_validation = 50;
  int n_test = 2000;

  std::string backend = "http";
  std::string backend_url;
  std::string model_name;
  std::string fixture;

  std::string out = "seidr_run.jsonl";
  std::string scratch = "seidr_scratch";
  std::string instruct_mode = "llm";
  std::string templates_dir;
  std::string python_bin;
  std::string cpp_compiler;
  int workers = 1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "JSON config file; flags override its values");
  cmd->add_option("--beam-width", flags.beam_width, "Parents kept per generation, or 'inf'");
  cmd->add_option("--n-draft", flags.n_draft, "Programs in the first generation, or 'inf'");
  cmd->add_option("--n-explain", flags.n_explain, "Bug explanations per selected parent");
  cmd->add_option("--n-debug", flags.n_debug, "Repairs per explanation");
  cmd->add_option("--max-programs", flags.max_programs,
                  "Total candidate budget M (default 100; required with 'inf' arities)");
  cmd->add_option("--selection", flags.selection, "tournament or lexicase");
  cmd->add_option("--seed", flags.seed, "Run seed");
  cmd->add_option("--run-timeout", flags.run_timeout, "Per-case wall-clock limit, seconds");
  cmd->add_option("--compile-timeout", flags.compile_timeout, "Compilation limit, seconds");
  cmd->add_option("--max-output-lines", flags.max_output_lines,
                  "Stdout line cap before a run counts as flooding");

  cmd->add_option("--dataset", flags.dataset, "psb2 or humaneval-x")
      ->check(CLI::IsMember({"psb2", "humaneval-x"}));
  cmd->add_option("--data-root", flags.data_root,
                  "PSB2 dataset directory, or the HumanEval-X release file");
  cmd->add_option("--language", flags.language, "python or cpp")
      ->check(CLI::IsMember({"python", "cpp"}));
  cmd->add_option("--n-validation", flags.n_validation, "PSB2 validation cases (default 50)");
  cmd->add_option("--n-test", flags.n_test, "PSB2 held-out cases (default 2000)");

  cmd->add_option("--backend", flags.backend, "http or scripted")
      ->check(CLI::IsMember({"http", "scripted"}));
  cmd->add_option("--backend-url", flags.backend_url,
                  "Chat endpoint base URL (or env SEIDR_BACKEND_URL)");
  cmd->add_option("--model-name", flags.model_name, "Model name sent to the backend");
  cmd->add_option("--fixture", flags.fixture, "Scripted backend fixture file");

  cmd->add_option("--out", flags.out, "Run log path (JSON lines)");
  cmd->add_option("--scratch", flags.scratch, "Scratch directory for candidate sandboxes");
  cmd->add_option("--instruct", flags.instruct_mode,
                  "Instruction design: llm summaries or the static template")
      ->check(CLI::IsMember({"llm", "static"}));
  cmd->add_option("--templates", flags.templates_dir, "Directory with prompt template overrides");
  cmd->add_option("--python-bin", flags.python_bin, "Python interpreter (default python3)");
  cmd->add_option("--cpp-compiler", flags.cpp_compiler, "C++ compiler (default g++)");
  cmd->add_option("--workers", flags.workers, "Parallel test executions per candidate");
}

int parse_arity(const std::string& text, const char* field) {
  if (text == "inf") return seidr::kInfArity;
  try {
    std::size_t used = 0;
    int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw seidr::ConfigError(std::string(field) + " must be an integer or 'inf'");
  }
}

int arity_from_json(const nlohmann::json& value, const char* field) {
  if (value.is_string()) return parse_arity(value.get<std::string>(), field);
  if (value.is_number_integer()) return value.get<int>();
  throw seidr::ConfigError(std::string(field) + " must be an integer or 'inf'");
}

// File first, then flags on top.
SearchConfig build_config(const CommonFlags& flags, const CLI::App* cmd) {
  SearchConfig config;
  config.max_programs = 100;
  bool max_programs_explicit = false;

  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) throw seidr::ConfigError("cannot open config file: " + flags.config_file);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw seidr::ConfigError("malformed config file: " + std::string(e.what()));
    }
    if (doc.contains("beam_width")) config.beam_width = arity_from_json(doc["beam_width"], "beam_width");
    if (doc.contains("n_draft")) config.n_draft = arity_from_json(doc["n_draft"], "n_draft");
    if (doc.contains("n_explain")) config.n_explain = doc["n_explain"].get<int>();
    if (doc.contains("n_debug")) config.n_debug = doc["n_debug"].get<int>();
    if (doc.contains("max_programs")) {
      config.max_programs = doc["max_programs"].get<int>();
      max_programs_explicit = true;
    }
    if (doc.contains("selection")) {
      config.selection = seidr::selection_from_string(doc["selection"].get<std::string>());
    }
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("exec_limits")) {
      const auto& limits = doc["exec_limits"];
      if (limits.contains("compile_timeout")) {
        config.exec_limits.compile_timeout = limits["compile_timeout"].get<double>();
      }
      if (limits.contains("run_timeout")) {
        config.exec_limits.run_timeout = limits["run_timeout"].get<double>();
      }
      if (limits.contains("max_output_lines")) {
        config.exec_limits.max_output_lines = limits["max_output_lines"].get<int>();
      }
    }
  }

  if (!flags.beam_width.empty()) config.beam_width = parse_arity(flags.beam_width, "beam_width");
  if (!flags.n_draft.empty()) config.n_draft = parse_arity(flags.n_draft, "n_draft");
  if (flags.n_explain > 0 || cmd->count("--n-explain")) config.n_explain = flags.n_explain;
  if (flags.n_debug > 0 || cmd->count("--n-debug")) config.n_debug = flags.n_debug;
  if (cmd->count("--max-programs")) {
    config.max_programs = static_cast<int>(flags.max_programs);
    max_programs_explicit = true;
  }
  if (!flags.selection.empty()) config.selection = seidr::selection_from_string(flags.selection);
  if (cmd->count("--seed")) config.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.run_timeout > 0) config.exec_limits.run_timeout = flags.run_timeout;
  if (flags.compile_timeout > 0) config.exec_limits.compile_timeout = flags.compile_timeout;
  if (cmd->count("--max-output-lines")) config.exec_limits.max_output_lines = flags.max_output_lines;

  if ((config.beam_width == seidr::kInfArity || config.n_draft == seidr::kInfArity) &&
      !max_programs_explicit) {
    throw seidr::ConfigError(
        "an 'inf' arity needs an explicit --max-programs (or max_programs in the config file)");
  }
  return seidr::validate_config(config);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value != nullptr ? std::string(value) : fallback;
}

seidr::BackendFactory make_backend_factory(const CommonFlags& flags) {
  if (flags.backend == "scripted") {
    if (flags.fixture.empty()) {
      throw seidr::ConfigError("--backend scripted requires --fixture");
    }
    std::string fixture = flags.fixture;
    return [fixture](std::uint64_t seed) {
      return seidr::BackendSet::shared(std::make_shared<seidr::ScriptedBackend>(
          seidr::ScriptedBackend::load_script(fixture), seed));
    };
  }
  seidr::HttpBackendConfig http;
  http.base_url = flags.backend_url.empty() ? env_or("SEIDR_BACKEND_URL", "") : flags.backend_url;
  if (http.base_url.empty()) {
    throw seidr::ConfigError("--backend http requires --backend-url or SEIDR_BACKEND_URL");
  }
  http.model = flags.model_name;
  http.api_key = env_or("SEIDR_API_KEY", env_or("OPENAI_API_KEY", ""));
  return [http](std::uint64_t) {
    return seidr::BackendSet::shared(std::make_shared<seidr::HttpBackend>(http));
  };
}

std::vector<seidr::Problem> load_problems(const CommonFlags& flags,
                                          const std::vector<std::string>& ids,
                                          std::uint64_t seed) {
  seidr::Language language = seidr::language_from_string(flags.language);
  if (flags.data_root.empty()) {
    throw seidr::ConfigError("--data-root is required");
  }
  std::vector<seidr::Problem> problems;
  if (flags.dataset == "psb2") {
    for (const auto& id : ids) {
      problems.push_back(
          seidr::load_psb2(flags.data_root, id, flags.n_validation, flags.n_test, seed, language));
    }
    return problems;
  }
  auto all = seidr::load_humaneval_x(flags.data_root, language);
  if (ids.size() == 1 && ids.front() == "all") return all;
  for (const auto& id : ids) {
    bool found = false;
    for (auto& problem : all) {
      if (problem.id == id) {
        problems.push_back(problem);
        found = true;
        break;
      }
    }
    if (!found) throw seidr::DatasetError("no such task in release file: " + id);
  }
  return problems;
}

seidr::RunContext build_context(const CommonFlags& flags) {
  seidr::RunContext context;
  context.dataset = flags.dataset;
  context.model = flags.model_name;
  context.log_path = flags.out;
  context.scratch_dir = flags.scratch;
  context.instruct_mode = seidr::instruct_mode_from_string(flags.instruct_mode);
  if (!flags.templates_dir.empty()) {
    context.templates = seidr::PromptTemplate::from_directory(flags.templates_dir);
  }
  if (!flags.python_bin.empty()) context.toolchain.python_interpreter = flags.python_bin;
  if (!flags.cpp_compiler.empty()) context.toolchain.cpp_compiler = flags.cpp_compiler;
  context.workers = flags.workers;
  // Scripted runs are replays; keep their logs byte-identical.
  context.wall_clock_timestamps = flags.backend != "scripted";
  return context;
}

void print_result(const seidr::SearchResult& result) {
  std::ostringstream out;
  out << "solved=" << (result.solved ? "true" : "false");
  if (result.epg) out << " epg=" << *result.epg;
  out << " programs_generated=" << result.programs_generated
      << " generations=" << result.generations;
  if (result.final_tpr) out << " final_tpr=" << *result.final_tpr;
  out << " best_validation=" << result.best_validation_score
      << " last_validation=" << result.last_validation_score;
  if (result.aborted) out << " aborted=true error=\"" << result.error << '"';
  out << " log=" << result.log_path;
  std::cout << out.str() << std::endl;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEIDR: iterative program synthesis and repair with LLM backends"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_problem;
  auto* run_cmd = app.add_subcommand("run", "Solve one problem with one configuration");
  run_cmd->add_option("--problem", run_problem, "Problem id (PSB2 name or HumanEval-X task id)")
      ->required();
  add_common_flags(run_cmd, run_flags);

  CommonFlags bench_flags;
  std::string bench_problems;
  int bench_repeats = 1;
  auto* bench_cmd = app.add_subcommand("bench", "Run a problem matrix with repeats");
  bench_cmd
      ->add_option("--problems", bench_problems,
                   "Comma-separated problem ids, or 'all' for a whole HumanEval-X file")
      ->required();
  bench_cmd->add_option("--repeats", bench_repeats, "Runs per problem with derived seeds");
  add_common_flags(bench_cmd, bench_flags);

  std::vector<std::string> report_inputs;
  std::string report_mode = "union";
  std::string report_format = "csv";
  std::string report_out;
  std::vector<int> report_ks{1, 10, 100};
  auto* report_cmd = app.add_subcommand("report", "Aggregate run logs into a pass@k table");
  report_cmd->add_option("--in", report_inputs, "Run log files")->required()->expected(-1);
  report_cmd->add_option("--mode", report_mode, "per_run, mean or union")
      ->check(CLI::IsMember({"per_run", "mean", "union"}));
  report_cmd->add_option("--format", report_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("--out", report_out, "Output file (stdout when omitted)");
  report_cmd->add_option("--k", report_ks, "Budget cutoffs (default 1 10 100)")->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      SearchConfig config = build_config(run_flags, run_cmd);
      auto problems = load_problems(run_flags, {run_problem}, config.seed);
      auto factory = make_backend_factory(run_flags);
      seidr::RunContext context = build_context(run_flags);
      seidr::SearchResult result =
          seidr::solve(problems.front(), config, factory(config.seed), context);
      print_result(result);
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      SearchConfig config = build_config(bench_flags, bench_cmd);
      auto ids = split_commas(bench_problems);
      if (ids.empty()) throw seidr::ConfigError("--problems must name at least one problem");
      auto problems = load_problems(bench_flags, ids, config.seed);
      auto factory = make_backend_factory(bench_flags);
      seidr::RunContext context = build_context(bench_flags);
      auto results = seidr::run_matrix(problems, {config}, bench_repeats, factory, context);
      for (const auto& result : results) print_result(result);
      return kExitOk;
    }

    // report
    auto logs = seidr::read_run_logs(report_inputs);
    auto table = seidr::report(logs, seidr::report_mode_from_string(report_mode), report_ks);
    std::string rendered = report_format == "json" ? table.to_json() : table.to_csv();
    if (report_out.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(report_out, std::ios::trunc);
      if (!out) throw seidr::ConfigError("cannot write report to " + report_out);
      out << rendered;
    }
    return kExitOk;
  } catch (const seidr::ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const seidr::DatasetError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const seidr::MixedDatasetError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    // Backend and sandbox aborts; the partial log is already on disk.
    std::cerr << "aborted: " << e.what() << std::endl;
    return kExitAbort;
  }
}
