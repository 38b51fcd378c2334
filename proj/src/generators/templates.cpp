#include "ensprompt/generators/templates.hpp"

#include <fstream>
#include <sstream>

#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls visit(begin, end, name) for each {name} occurrence.
template <typename Visit>
void scan_placeholders(const std::string& text, Visit&& visit) {
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    std::size_t end = pos + 1;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end > pos + 1 && end < text.size() && text[end] == '}') {
      visit(pos, end + 1, text.substr(pos + 1, end - pos - 1));
      pos = end + 1;
    } else {
      ++pos;
    }
  }
}

const char* const kBadCaseReflection = R"(You are improving the system prompt that a language model follows to solve a task.

# Current Prompt
{current_prompt}

# Failure Cases
With the current prompt, the model answered the following inputs incorrectly:

{bad_cases}

# Instructions
1. Reflect on why the current prompt leads the model to each of these errors. Look for the underlying cause (a missing rule, an ambiguous instruction, a wrong assumption), not only the surface mistake.
2. Rewrite the prompt so it removes those causes while keeping everything that already works.
3. Keep the answer-format requirements of the current prompt exactly as they are.

Return only the improved prompt text, without commentary.)";

const char* const kMutation = R"(Below is a system prompt for a task together with its measured score.

# Prompt (score: {score})
{current_prompt}

Write a new version of this prompt that keeps the same task requirements and answer format but is expressed differently: vary the wording, the structure, or which points are emphasized.

Return only the new prompt text, without commentary.)";

const char* const kZeroOrder = R"(Here are existing system prompts for the same task with their measured scores, best first.

{population_summary}

Study the structure and the techniques these prompts rely on. Then write an entirely new prompt for the task that combines their strengths in a way none of them does. Keep the answer-format requirements they share.

Return only the new prompt text, without commentary.)";

const char* const kHardCase = R"(You are optimizing a system prompt for a task. Across all prompts tried so far, the inputs below are the ones answered incorrectly most often. Each hard case lists how many times it was failed and the prompts that failed it.

{hard_cases}

# Current Best Prompt
{current_prompt}

Work out what the failing prompts have in common and what these hard cases actually require. Then write one improved prompt that handles them while still solving ordinary inputs, keeping the answer-format requirements of the current best prompt.

Return only the new prompt text, without commentary.)";

}  // namespace

MetaPromptTemplate::MetaPromptTemplate(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)) {}

std::set<std::string> MetaPromptTemplate::placeholders() const {
  std::set<std::string> names;
  scan_placeholders(text_, [&](std::size_t, std::size_t, std::string name) { names.insert(std::move(name)); });
  return names;
}

std::string MetaPromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string missing;
  for (const auto& name : placeholders()) {
    if (!values.contains(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) {
    throw ContractViolation("template '" + name_ + "' has no value for: " + missing);
  }
  std::string out;
  std::size_t copied = 0;
  scan_placeholders(text_, [&](std::size_t begin, std::size_t end, const std::string& name) {
    out.append(text_, copied, begin - copied);
    out += values.at(name);
    copied = end;
  });
  out.append(text_, copied, std::string::npos);
  return out;
}

TemplateSet TemplateSet::defaults() {
  return TemplateSet{
      MetaPromptTemplate("bad_case_reflection", kBadCaseReflection),
      MetaPromptTemplate("mutation", kMutation),
      MetaPromptTemplate("zero_order", kZeroOrder),
      MetaPromptTemplate("hard_case", kHardCase),
  };
}

TemplateSet TemplateSet::load(const std::filesystem::path& directory) {
  TemplateSet set = defaults();
  if (!std::filesystem::is_directory(directory)) {
    throw LoadError("template directory '" + directory.string() + "' does not exist");
  }
  for (MetaPromptTemplate* slot : {&set.bad_case_reflection, &set.mutation, &set.zero_order, &set.hard_case}) {
    const auto path = directory / (slot->name() + ".txt");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot read template '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    *slot = MetaPromptTemplate(slot->name(), buffer.str());
  }
  return set;
}

}  // namespace ensprompt
