#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

// One JSON object per line: {"id"?: str, "input": str, "expected": str}.
// Missing ids become the 1-based line number. Blank lines are skipped.
// Throws LoadError on unreadable files, bad lines, duplicate ids, or an
// empty result.
std::vector<Example> load_jsonl(const std::filesystem::path& path);
std::vector<Example> parse_jsonl(std::string_view text, std::string_view source = "<memory>");

struct SplitPair {
  std::vector<Example> first;
  std::vector<Example> second;
};

// Seeded shuffle, then the first round(fraction * n) examples (at least one,
// at most n-1 when n > 1) go to `second`. Order inside each part follows the
// original file order.
SplitPair split_holdout(std::span<const Example> examples, double fraction, std::uint64_t seed);

}  // namespace ensprompt
