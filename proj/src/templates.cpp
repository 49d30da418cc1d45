#include "seidr/templates.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace seidr {

namespace {

bool slot_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::string read_file_or(const std::filesystem::path& path, const std::string& fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string render_template(const std::string& text, const SlotValues& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (c != '{') {
      out.push_back(c);
      ++pos;
      continue;
    }
    std::size_t end = pos + 1;
    while (end < text.size() && slot_char(text[end])) ++end;
    if (end >= text.size() || text[end] != '}' || end == pos + 1) {
      // Not a slot; braces in code or prose pass through.
      out.push_back(c);
      ++pos;
      continue;
    }
    std::string name = text.substr(pos + 1, end - pos - 1);
    auto it = values.find(name);
    if (it == values.end()) {
      throw TemplateError("no value for template slot {" + name + "}");
    }
    out += it->second;
    pos = end + 1;
  }
  return out;
}

PromptTemplate PromptTemplate::defaults() {
  PromptTemplate t;
  t.system_message =
      "You are an experienced software developer.\n"
      "You write concise code in {language}.\n"
      "The code must read input from user and return output corresponding to the task "
      "description.";
  t.draft =
      "Solve the following code contest problem: {problem_name}.\n"
      "Problem description: {problem_description}.\n"
      "{program_template}\n"
      "Only complete the code, do not add triple quotes, do not give explanations.";
  t.explain =
      "I'm trying to solve the following code contest problem: {problem_name}.\n"
      "Problem description: {problem_description}.\n"
      "Currently, the code is\n"
      "```\n"
      "{program_candidate}\n"
      "```\n"
      "The issue is {issue}.\n"
      "Describe how I should fix the code in a very concise manner.";
  t.debug =
      "Solve the following code contest problem: {problem_name}.\n"
      "Problem description: {problem_description}.\n"
      "Currently, the code is\n"
      "```\n"
      "{program_candidate}\n"
      "```\n"
      "Modify the code as {bug_summary}.\n"
      "You must only return correct code.\n"
      "Remove any triple quotes, language name or explanations.";
  t.preamble_python = "";
  t.preamble_cpp = "#include <bits/stdc++.h>\nusing namespace std;\n";
  return t;
}

PromptTemplate PromptTemplate::from_directory(const std::string& dir) {
  PromptTemplate t = defaults();
  std::filesystem::path root(dir);
  t.system_message = read_file_or(root / "system_message.txt", t.system_message);
  t.draft = read_file_or(root / "draft.txt", t.draft);
  t.explain = read_file_or(root / "explain.txt", t.explain);
  t.debug = read_file_or(root / "debug.txt", t.debug);
  t.preamble_python = read_file_or(root / "preamble_python.txt", t.preamble_python);
  t.preamble_cpp = read_file_or(root / "preamble_cpp.txt", t.preamble_cpp);
  return t;
}

}  // namespace seidr
