#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

// Insertion-ordered set of candidates, unique by id and by normalized text.
class CandidatePool {
 public:
  // Adds the candidate unless its id or normalized text is already present.
  // Returns true on insertion.
  bool insert(PromptCandidate candidate);

  bool contains_text(std::string_view text) const;
  bool contains_id(std::string_view id) const;

  const PromptCandidate& at(std::string_view id) const;
  PromptCandidate& at(std::string_view id);
  const PromptCandidate* find(std::string_view id) const;

  const std::vector<PromptCandidate>& candidates() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  std::vector<PromptCandidate> evaluated() const;
  std::vector<PromptCandidate> unevaluated() const;

 private:
  std::vector<PromptCandidate> items_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::string, std::less<>> id_by_text_;
};

// Sequential ids ("p000001", ...) so lexicographic order equals creation order.
std::string make_candidate_id(std::size_t counter);

}  // namespace ensprompt
