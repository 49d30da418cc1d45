#include "seidr/bench.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seidr/errors.hpp"

namespace seidr {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_value_lines(const std::string& value) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : value) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  lines.push_back(current);
  return lines;
}

// ---- PSB2 ----------------------------------------------------------------

struct CsvColumns {
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
};

CsvColumns classify_columns(const std::vector<std::string>& header, const std::string& file) {
  CsvColumns columns;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("input", 0) == 0) {
      columns.inputs.push_back(i);
    } else if (header[i].rfind("output", 0) == 0) {
      columns.outputs.push_back(i);
    }
  }
  if (columns.inputs.empty() || columns.outputs.empty()) {
    throw DatasetError(file + ": header has no input/output columns");
  }
  return columns;
}

std::vector<TestCase> read_psb2_cases(const std::filesystem::path& path, CaseOrigin origin) {
  auto rows = parse_csv(read_file(path));
  if (rows.size() < 2) throw DatasetError(path.string() + ": no data rows");
  CsvColumns columns = classify_columns(rows.front(), path.string());

  std::vector<TestCase> cases;
  cases.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() < rows.front().size()) {
      throw DatasetError(path.string() + ": row " + std::to_string(r) + " has " +
                         std::to_string(row.size()) + " fields, expected " +
                         std::to_string(rows.front().size()));
    }
    TestCase test;
    test.kind = CaseKind::io_pair;
    test.origin = origin;
    for (std::size_t c : columns.inputs) {
      for (auto& line : split_value_lines(row[c])) test.input_lines.push_back(std::move(line));
    }
    for (std::size_t c : columns.outputs) {
      for (auto& line : split_value_lines(row[c])) {
        test.expected_output_lines.push_back(std::move(line));
      }
    }
    cases.push_back(std::move(test));
  }
  return cases;
}

// Deterministic across platforms: mt19937_64 output with plain modulo draws.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(indices[i - 1], indices[j]);
  }
  return indices;
}

// ---- test splitting -------------------------------------------------------

bool starts_with_assert(const std::string& line) {
  std::size_t start = line.find_first_not_of(" \t");
  if (start == std::string::npos) return false;
  if (line.compare(start, 6, "assert") != 0) return false;
  std::size_t after = start + 6;
  if (after >= line.size()) return true;
  char c = line[after];
  return c == ' ' || c == '\t' || c == '(';
}

bool contains_assert_call(const std::string& text) {
  std::size_t pos = 0;
  while ((pos = text.find("assert", pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) ||
                                 text[pos - 1] == '_');
    std::size_t after = pos + 6;
    bool right_ok = after >= text.size() ||
                    !(std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_');
    if (left_ok && right_ok) return true;
    pos = after;
  }
  return false;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out += '\n';
  }
  return out;
}

std::size_t indent_of(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

bool blank_line(const std::string& line) { return indent_of(line) == line.size(); }

// Line scanner tracking python bracket depth, strings and trailing
// backslashes, enough to find statement boundaries in a test body.
struct PyScanState {
  int brackets = 0;
  char quote = 0;
  bool triple = false;
  bool continuation = false;
};

void scan_python_line(const std::string& line, PyScanState& state) {
  state.continuation = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (state.quote != 0) {
      if (c == '\\') {
        i += 2;
        continue;
      }
      if (c == state.quote) {
        if (state.triple) {
          if (line.compare(i, 3, std::string(3, state.quote)) == 0) {
            state.quote = 0;
            state.triple = false;
            i += 3;
            continue;
          }
        } else {
          state.quote = 0;
        }
      }
      ++i;
      continue;
    }
    if (c == '#') break;
    if (c == '\'' || c == '"') {
      if (line.compare(i, 3, std::string(3, c)) == 0) {
        state.quote = c;
        state.triple = true;
        i += 3;
        continue;
      }
      state.quote = c;
      ++i;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++state.brackets;
    if (c == ')' || c == ']' || c == '}') --state.brackets;
    ++i;
  }
  if (state.quote == 0 && !line.empty() && line.back() == '\\') state.continuation = true;
}

struct Statement {
  std::vector<std::string> lines;
  bool is_assertion = false;
};

std::vector<TestCase> split_python_tests(const std::string& source) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : source) {
      if (c == '\n') {
        lines.push_back(current);
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) lines.push_back(current);
  }

  // Wrapper function: the first top-level def. Everything before it is
  // prefix, everything after its body is suffix; both are replicated into
  // every snippet.
  std::size_t def_line = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind("def ", 0) == 0) {
      def_line = i;
      break;
    }
  }

  std::vector<std::string> prefix;
  std::vector<std::string> suffix;
  std::vector<Statement> body;

  if (def_line == lines.size()) {
    // No wrapper; treat the whole file as a flat statement list.
    PyScanState state;
    Statement current;
    bool open = false;
    for (const auto& line : lines) {
      bool boundary = state.brackets == 0 && state.quote == 0 && !state.continuation;
      if (open && boundary && !blank_line(line) && indent_of(line) == 0) {
        body.push_back(std::move(current));
        current = {};
      }
      current.lines.push_back(line);
      open = true;
      scan_python_line(line, state);
    }
    if (open) body.push_back(std::move(current));
  } else {
    prefix.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(def_line) + 1);
    std::size_t body_start = def_line + 1;
    std::size_t body_indent = 0;
    for (std::size_t i = body_start; i < lines.size(); ++i) {
      if (!blank_line(lines[i])) {
        body_indent = indent_of(lines[i]);
        break;
      }
    }
    if (body_indent == 0) throw SplitError("test wrapper has an empty body");

    PyScanState state;
    Statement current;
    bool open = false;
    std::size_t i = body_start;
    for (; i < lines.size(); ++i) {
      const std::string& line = lines[i];
      bool boundary = state.brackets == 0 && state.quote == 0 && !state.continuation;
      if (boundary && !blank_line(line) && indent_of(line) < body_indent) break;  // dedent: body ended
      if (open && boundary && !blank_line(line) && indent_of(line) == body_indent) {
        body.push_back(std::move(current));
        current = {};
      }
      current.lines.push_back(line);
      open = true;
      scan_python_line(line, state);
    }
    if (open) body.push_back(std::move(current));
    suffix.assign(lines.begin() + static_cast<std::ptrdiff_t>(i), lines.end());
  }

  for (auto& statement : body) {
    for (const auto& line : statement.lines) {
      if (starts_with_assert(line)) {
        statement.is_assertion = true;
        break;
      }
    }
  }

  std::vector<TestCase> cases;
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (!body[k].is_assertion) continue;
    std::vector<std::string> snippet_lines = prefix;
    for (std::size_t j = 0; j < k; ++j) {
      if (!body[j].is_assertion) {
        snippet_lines.insert(snippet_lines.end(), body[j].lines.begin(), body[j].lines.end());
      }
    }
    snippet_lines.insert(snippet_lines.end(), body[k].lines.begin(), body[k].lines.end());
    snippet_lines.insert(snippet_lines.end(), suffix.begin(), suffix.end());
    cases.push_back(TestCase::assertion_case(join_lines(snippet_lines)));
  }
  if (cases.empty()) throw SplitError("no assertion found in aggregated test source");
  return cases;
}

// C++ scanner for statement boundaries inside the main test body.
struct CxxScanState {
  int braces = 0;
  int parens = 0;
  char quote = 0;
  bool block_comment = false;
};

std::vector<TestCase> split_cpp_tests(const std::string& source) {
  std::size_t main_pos = source.find("int main");
  if (main_pos == std::string::npos) main_pos = source.find("main(");
  if (main_pos == std::string::npos) throw SplitError("no main function in aggregated test source");
  std::size_t body_open = source.find('{', main_pos);
  if (body_open == std::string::npos) throw SplitError("main function has no body");

  const std::string prefix = source.substr(0, body_open + 1);

  // Split the body into top-level statements; a block statement ends at its
  // closing brace, a simple one at its semicolon.
  std::vector<Statement> body;
  CxxScanState state;
  std::string current;
  std::size_t i = body_open + 1;
  std::size_t body_end = source.size();
  for (; i < source.size(); ++i) {
    char c = source[i];
    if (state.block_comment) {
      current.push_back(c);
      if (c == '/' && i > 0 && source[i - 1] == '*') state.block_comment = false;
      continue;
    }
    if (state.quote != 0) {
      current.push_back(c);
      if (c == '\\') {
        if (i + 1 < source.size()) {
          current.push_back(source[++i]);
        }
        continue;
      }
      if (c == state.quote) state.quote = 0;
      continue;
    }
    if (c == '/' && i + 1 < source.size() && source[i + 1] == '*') {
      state.block_comment = true;
      current.push_back(c);
      continue;
    }
    if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
      while (i < source.size() && source[i] != '\n') current.push_back(source[i++]);
      if (i < source.size()) current.push_back('\n');
      continue;
    }
    if (c == '"' || c == '\'') {
      state.quote = c;
      current.push_back(c);
      continue;
    }
    if (c == '}' && state.braces == 0) {
      body_end = i;
      break;  // closing brace of main
    }
    current.push_back(c);
    if (c == '{') ++state.braces;
    if (c == '}') {
      --state.braces;
      if (state.braces == 0 && state.parens == 0) {
        body.push_back(Statement{{current}, false});
        current.clear();
      }
    }
    if (c == '(') ++state.parens;
    if (c == ')') --state.parens;
    if (c == ';' && state.braces == 0 && state.parens == 0) {
      body.push_back(Statement{{current}, false});
      current.clear();
    }
  }
  if (!current.empty() && current.find_first_not_of(" \t\r\n") != std::string::npos) {
    body.push_back(Statement{{current}, false});
  }
  const std::string suffix = source.substr(body_end);

  for (auto& statement : body) {
    statement.is_assertion = contains_assert_call(statement.lines.front());
  }

  std::vector<TestCase> cases;
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (!body[k].is_assertion) continue;
    std::string snippet = prefix;
    for (std::size_t j = 0; j < k; ++j) {
      if (!body[j].is_assertion) snippet += body[j].lines.front();
    }
    snippet += body[k].lines.front();
    snippet += '\n';
    snippet += suffix;
    cases.push_back(TestCase::assertion_case(std::move(snippet)));
  }
  if (cases.empty()) throw SplitError("no assertion found in aggregated test source");
  return cases;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;

  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        ++i;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        ++i;
        break;
      case '\r':
        ++i;
        break;
      case '\n':
        if (any || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          field.clear();
          rows.push_back(std::move(row));
          row.clear();
          any = false;
        }
        ++i;
        break;
      default:
        field.push_back(c);
        any = true;
        ++i;
        break;
    }
  }
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Problem load_psb2(const std::string& root, const std::string& problem_id, int n_validation,
                  int n_test, std::uint64_t seed, Language language) {
  if (n_validation < 1) throw DatasetError("n_validation must be >= 1");
  if (n_test < 0) throw DatasetError("n_test must be >= 0");
  std::filesystem::path dir = std::filesystem::path(root) / problem_id;
  if (!std::filesystem::is_directory(dir)) {
    throw DatasetError("psb2 problem directory not found: " + dir.string());
  }
  auto edge_cases = read_psb2_cases(dir / (problem_id + "-edge.csv"), CaseOrigin::edge);
  auto random_cases = read_psb2_cases(dir / (problem_id + "-random.csv"), CaseOrigin::random);

  std::size_t want_validation = static_cast<std::size_t>(n_validation);
  std::size_t want_test = static_cast<std::size_t>(n_test);
  std::size_t from_edge = std::min(edge_cases.size(), want_validation);
  std::size_t fill = want_validation - from_edge;
  if (fill > random_cases.size()) {
    throw DatasetError(problem_id + ": not enough cases for a validation set of " +
                       std::to_string(n_validation));
  }
  if (fill + want_test > random_cases.size()) {
    throw DatasetError(problem_id + ": n_test of " + std::to_string(n_test) +
                       " exceeds available random rows");
  }

  auto order = shuffled_indices(random_cases.size(), seed);

  Problem problem;
  problem.id = problem_id;
  problem.name = problem_id;
  problem.language = language;

  std::string description_file = (dir / "description.txt").string();
  if (std::filesystem::exists(description_file)) {
    problem.description = read_file(description_file);
    while (!problem.description.empty() && problem.description.back() == '\n') {
      problem.description.pop_back();
    }
  } else {
    problem.description = problem_id;
    std::replace(problem.description.begin(), problem.description.end(), '-', ' ');
  }

  problem.validation_cases.assign(edge_cases.begin(),
                                  edge_cases.begin() + static_cast<std::ptrdiff_t>(from_edge));
  for (std::size_t k = 0; k < fill; ++k) {
    problem.validation_cases.push_back(random_cases[order[k]]);
  }
  for (std::size_t k = 0; k < want_test; ++k) {
    problem.test_cases.push_back(random_cases[order[fill + k]]);
  }
  std::size_t prompt_count = std::min<std::size_t>(5, problem.validation_cases.size());
  problem.prompt_cases.assign(problem.validation_cases.begin(),
                              problem.validation_cases.begin() +
                                  static_cast<std::ptrdiff_t>(prompt_count));
  return problem;
}

std::vector<Problem> load_humaneval_x(const std::string& file, Language language) {
  std::ifstream in(file);
  if (!in) throw DatasetError("cannot open humaneval-x file: " + file);

  std::vector<Problem> problems;
  std::string line;
  int record_index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(file + ": record " + std::to_string(record_index) +
                         " is malformed: " + e.what());
    }
    try {
      Problem problem;
      problem.id = doc.at("task_id").get<std::string>();
      problem.name = problem.id;
      problem.description = doc.at("prompt").get<std::string>();
      problem.language = language;

      std::string test_source = doc.at("test").get<std::string>();
      if (language == Language::python && doc.contains("entry_point")) {
        // Some release files keep the check(...) invocation out of the test
        // body; splice it in so each snippet actually runs.
        if (test_source.find("\ncheck(") == std::string::npos &&
            test_source.rfind("check(", 0) == std::string::npos) {
          test_source += "\ncheck(" + doc.at("entry_point").get<std::string>() + ")\n";
        }
      }
      problem.test_cases = split_tests(test_source, language);
      problem.validation_cases = problem.test_cases;  // all tests visible; no held-out split
      std::size_t prompt_count = std::min<std::size_t>(5, problem.validation_cases.size());
      problem.prompt_cases.assign(problem.validation_cases.begin(),
                                  problem.validation_cases.begin() +
                                      static_cast<std::ptrdiff_t>(prompt_count));
      problems.push_back(std::move(problem));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(file + ": record " + std::to_string(record_index) +
                         " is missing fields: " + e.what());
    } catch (const SplitError& e) {
      throw DatasetError(file + ": record " + std::to_string(record_index) + ": " + e.what());
    }
    ++record_index;
  }
  if (problems.empty()) throw DatasetError(file + ": no records");
  return problems;
}

std::vector<TestCase> split_tests(const std::string& aggregate_test_source, Language language) {
  return language == Language::python ? split_python_tests(aggregate_test_source)
                                      : split_cpp_tests(aggregate_test_source);
}

}  // namespace seidr
