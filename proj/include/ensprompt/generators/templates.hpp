#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace ensprompt {

// Plain text with {name} placeholders, where name is [a-z_]+. Any other use
// of braces (JSON snippets, say) is left alone.
class MetaPromptTemplate {
 public:
  MetaPromptTemplate() = default;
  MetaPromptTemplate(std::string name, std::string text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }
  std::set<std::string> placeholders() const;

  // Throws ContractViolation naming every referenced placeholder that has
  // no value.
  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  std::string name_;
  std::string text_;
};

struct TemplateSet {
  MetaPromptTemplate bad_case_reflection;
  MetaPromptTemplate mutation;
  MetaPromptTemplate zero_order;
  MetaPromptTemplate hard_case;

  static TemplateSet defaults();
  // Defaults, with any of bad_case_reflection.txt, mutation.txt,
  // zero_order.txt, hard_case.txt found in `directory` taking precedence.
  static TemplateSet load(const std::filesystem::path& directory);
};

}  // namespace ensprompt
