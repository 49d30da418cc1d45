#pragma once

#include <map>
#include <string>

#include "seidr/core.hpp"
#include "seidr/errors.hpp"

namespace seidr {

using SlotValues = std::map<std::string, std::string>;

// Substitutes every {slot} placeholder in `text` with its value in a single
// pass; substituted values are emitted verbatim, never re-scanned. A
// placeholder with no value throws TemplateError, so no slot can survive into
// the output. Braces not wrapping a well-formed slot name ([a-z0-9_]+) are
// literal text.
std::string render_template(const std::string& text, const SlotValues& values);

// The prompt set for one run: the chat system message plus the user-message
// templates for the draft, explain and debug roles, and the per-language
// preambles that head the program template.
struct PromptTemplate {
  std::string system_message;
  std::string draft;
  std::string explain;
  std::string debug;
  std::string preamble_python;
  std::string preamble_cpp;

  const std::string& preamble(Language language) const {
    return language == Language::python ? preamble_python : preamble_cpp;
  }

  static PromptTemplate defaults();

  // Overrides individual templates from <dir>/{system_message,draft,explain,
  // debug,preamble_python,preamble_cpp}.txt; missing files keep the default.
  static PromptTemplate from_directory(const std::string& dir);
};

}  // namespace seidr
