#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "seidr/synthesize.hpp"

using namespace seidr;

namespace {

Problem toy_problem(int prompt_cases = 1) {
  Problem problem;
  problem.id = "fizz-buzz";
  problem.name = "fizz-buzz";
  problem.description = "Given an integer x, print Fizz if divisible by 3";
  problem.language = Language::python;
  for (int i = 0; i < prompt_cases; ++i) {
    problem.prompt_cases.push_back(
        TestCase::io({std::to_string(3 * (i + 1))}, {"Fizz"}));
  }
  problem.validation_cases = problem.prompt_cases;
  return problem;
}

class FixedBackend : public ModelBackend {
 public:
  explicit FixedBackend(std::string reply) : reply_(std::move(reply)) {}
  ModelResponse complete(const ModelRequest& request) override {
    temperatures.push_back(request.temperature);
    return ModelResponse{reply_, id(), 0.0};
  }
  std::string id() const override { return "fixed"; }
  std::vector<double> temperatures;

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("render_template substitutes slots and rejects unknown ones") {
  SlotValues values{{"name", "fizz"}, {"lang", "python"}};
  CHECK(render_template("solve {name} in {lang}", values) == "solve fizz in python");
  CHECK_THROWS_AS(render_template("solve {name} with {missing}", values), TemplateError);
}

TEST_CASE("render_template leaves non-slot braces alone") {
  SlotValues values{{"code", "int main() { return 0; }"}};
  CHECK(render_template("{code}", values) == "int main() { return 0; }");
  // A substituted value is never re-scanned for slots.
  SlotValues recursive{{"a", "{b}"}, {"b", "nope"}};
  CHECK(render_template("{a}", recursive) == "{b}");
}

TEST_CASE("draft prompt carries the contest header, description and cases as comments") {
  Problem problem = toy_problem(2);
  auto [system_message, user_message] = render_draft_prompt(problem, PromptTemplate::defaults());

  CHECK(system_message.find("You write concise code in python.") != std::string::npos);
  CHECK(user_message.find("Solve the following code contest problem: fizz-buzz") !=
        std::string::npos);
  CHECK(user_message.find(problem.description) != std::string::npos);
  CHECK(user_message.find("# input:") != std::string::npos);
  CHECK(user_message.find("# 3") != std::string::npos);
  CHECK(user_message.find("# output:") != std::string::npos);
  CHECK(user_message.find("# Fizz") != std::string::npos);
  CHECK(user_message.find("do not add triple quotes") != std::string::npos);
}

TEST_CASE("draft prompt renders at most five prompt cases") {
  Problem problem = toy_problem(7);
  auto [system_message, user_message] = render_draft_prompt(problem, PromptTemplate::defaults());
  (void)system_message;
  // cases are 3,6,9,12,15,18,21; the last two must be absent
  CHECK(user_message.find("# 15") != std::string::npos);
  CHECK(user_message.find("# 18") == std::string::npos);
  CHECK(user_message.find("# 21") == std::string::npos);
}

TEST_CASE("draft prompt requires a prompt case and a complete template") {
  Problem empty = toy_problem(0);
  CHECK_THROWS_AS(render_draft_prompt(empty, PromptTemplate::defaults()), TemplateError);

  PromptTemplate broken = PromptTemplate::defaults();
  broken.draft = "{problem_description} and {no_such_slot}";
  CHECK_THROWS_AS(render_draft_prompt(toy_problem(), broken), TemplateError);
}

TEST_CASE("cpp program template uses the cpp preamble and comment marker") {
  Problem problem = toy_problem(1);
  problem.language = Language::cpp;
  std::string text = build_program_template(problem, PromptTemplate::defaults());
  CHECK(text.find("#include <bits/stdc++.h>") != std::string::npos);
  CHECK(text.find("// input:") != std::string::npos);
}

TEST_CASE("assertion prompt cases are rendered as commented test snippets") {
  Problem problem;
  problem.id = "double";
  problem.name = "double";
  problem.description = "double the input";
  problem.language = Language::python;
  problem.prompt_cases = {TestCase::assertion_case("assert double(2) == 4")};
  problem.validation_cases = problem.prompt_cases;

  std::string text = build_program_template(problem, PromptTemplate::defaults());
  CHECK(text.find("# test:") != std::string::npos);
  CHECK(text.find("# assert double(2) == 4") != std::string::npos);
}

TEST_CASE("templates load overrides from a directory, keeping defaults elsewhere") {
  auto dir = std::filesystem::temp_directory_path() /
             ("seidr_tmpl_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "draft.txt");
    out << "Custom draft for {problem_name}";
  }
  PromptTemplate templates = PromptTemplate::from_directory(dir.string());
  CHECK(templates.draft == "Custom draft for {problem_name}");
  CHECK(templates.system_message == PromptTemplate::defaults().system_message);

  Problem problem = toy_problem();
  auto [system_message, user_message] = render_draft_prompt(problem, templates);
  (void)system_message;
  CHECK(user_message == "Custom draft for fizz-buzz");
  std::filesystem::remove_all(dir);
}

TEST_CASE("extract_code strips fences, tags and surrounding prose") {
  CHECK(extract_code("```python\nprint(1)\n```", Language::python) == "print(1)");
  CHECK(extract_code("print(1)", Language::python) == "print(1)");
  CHECK(extract_code("Here is the code:\n```\nx=1\n```\nHope it helps", Language::python) ==
        "x=1");
  CHECK(extract_code("```cpp\nint main(){}\n```", Language::cpp) == "int main(){}");
  // unclosed fence: keep everything after it
  CHECK(extract_code("```\na\nb", Language::python) == "a\nb");
  // multi-line body survives intact
  CHECK(extract_code("```python\nfor i in x:\n    print(i)\n```", Language::python) ==
        "for i in x:\n    print(i)");
}

TEST_CASE("extract_code is idempotent") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pieces{"```",     "```python", "print(1)", "x=1",
                                        "prose:",  "",          "  code()", "``` tail",
                                        "}\n{",    "done"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string raw;
    int lines = static_cast<int>(rng() % 8);
    for (int i = 0; i < lines; ++i) {
      if (i > 0) raw += '\n';
      raw += pieces[rng() % pieces.size()];
    }
    std::string once = extract_code(raw, Language::python);
    std::string twice = extract_code(once, Language::python);
    CHECK(once == twice);
  }
}

TEST_CASE("rendering is pure") {
  Problem problem = toy_problem(3);
  auto a = render_draft_prompt(problem, PromptTemplate::defaults());
  auto b = render_draft_prompt(problem, PromptTemplate::defaults());
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("synthesize_drafts produces ids and schedule temperatures") {
  Problem problem = toy_problem();
  SearchConfig config;
  config.n_draft = 10;
  config.max_programs = 100;
  FixedBackend backend("```python\nprint('x')\n```");

  auto drafts = synthesize_drafts(problem, config, PromptTemplate::defaults(), backend);
  REQUIRE(drafts.size() == 10);
  for (int i = 0; i < 10; ++i) {
    const auto& draft = drafts[static_cast<std::size_t>(i)];
    CHECK(draft.id == i);
    CHECK(draft.generation == 0);
    CHECK(draft.origin == CandidateOrigin::draft);
    CHECK_FALSE(draft.parent_id.has_value());
    CHECK(draft.temperature == i / 10.0);
    CHECK(draft.source == "print('x')");
  }
}

TEST_CASE("synthesize_drafts truncates at the budget") {
  Problem problem = toy_problem();
  SearchConfig config;
  config.n_draft = 10;
  config.max_programs = 4;
  FixedBackend backend("print('x')");

  auto drafts = synthesize_drafts(problem, config, PromptTemplate::defaults(), backend);
  REQUIRE(drafts.size() == 4);
  CHECK(backend.temperatures == std::vector<double>{0.0, 0.1, 0.2, 0.3});
}

TEST_CASE("single draft uses the greedy temperature") {
  Problem problem = toy_problem();
  SearchConfig config;
  config.n_draft = 1;
  config.max_programs = 10;
  FixedBackend backend("print('x')");
  auto drafts = synthesize_drafts(problem, config, PromptTemplate::defaults(), backend);
  REQUIRE(drafts.size() == 1);
  CHECK(drafts[0].temperature == 0.0);
}
