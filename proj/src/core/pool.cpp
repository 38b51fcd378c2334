#include "ensprompt/core/pool.hpp"

#include <cstdio>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

bool CandidatePool::insert(PromptCandidate candidate) {
  if (trim(candidate.text).empty()) {
    throw ContractViolation("candidate '" + candidate.id + "' has empty text");
  }
  if (candidate.score && !(*candidate.score >= 0.0 && *candidate.score <= 1.0)) {
    throw ContractViolation("candidate '" + candidate.id + "' has a score outside [0, 1]");
  }
  std::string key = normalize_prompt_text(candidate.text);
  if (by_id_.contains(candidate.id) || id_by_text_.contains(key)) {
    return false;
  }
  by_id_.emplace(candidate.id, items_.size());
  id_by_text_.emplace(std::move(key), candidate.id);
  items_.push_back(std::move(candidate));
  return true;
}

bool CandidatePool::contains_text(std::string_view text) const {
  return id_by_text_.contains(normalize_prompt_text(text));
}

bool CandidatePool::contains_id(std::string_view id) const { return by_id_.find(id) != by_id_.end(); }

const PromptCandidate* CandidatePool::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &items_[it->second];
}

const PromptCandidate& CandidatePool::at(std::string_view id) const {
  if (const auto* found = find(id)) return *found;
  throw ContractViolation("no candidate with id '" + std::string(id) + "'");
}

PromptCandidate& CandidatePool::at(std::string_view id) {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw ContractViolation("no candidate with id '" + std::string(id) + "'");
  }
  return items_[it->second];
}

std::vector<PromptCandidate> CandidatePool::evaluated() const {
  std::vector<PromptCandidate> out;
  for (const auto& c : items_) {
    if (c.evaluated()) out.push_back(c);
  }
  return out;
}

std::vector<PromptCandidate> CandidatePool::unevaluated() const {
  std::vector<PromptCandidate> out;
  for (const auto& c : items_) {
    if (!c.evaluated()) out.push_back(c);
  }
  return out;
}

std::string make_candidate_id(std::size_t counter) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "p%06zu", counter);
  return buffer;
}

}  // namespace ensprompt
