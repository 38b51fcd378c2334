#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

std::string trim(std::string_view text);
std::string casefold(std::string_view text);

// Canonical numeric spelling: no thousands separators, sign, leading zeros
// or trailing fractional zeros ("+0,012.50" -> "12.5"). nullopt if the text
// is not a plain number.
std::optional<std::string> normalize_number(std::string_view text);

// trim + casefold + strip trailing punctuation; numeric strings are further
// reduced with normalize_number.
std::string normalize_label(std::string_view text);

// Whitespace-collapsed, casefolded form used for prompt-text dedup.
std::string normalize_prompt_text(std::string_view text);

// Extract a label from a raw model output. Never throws; returns nullopt
// (INVALID) when nothing usable is found.
//
// Order of attempts:
//   1. JSON payload [{"label": X}] (or a bare {"label": X} object)
//   2. the same after stripping code fences and surrounding whitespace
//   3. the trimmed output matched against a closed label space
//   4. open label space only: the last number token, normalized
Prediction parse_label(std::string_view raw_output, const LabelSpace& label_space);

// Inverse helper: the strict JSON form the task model is asked to emit.
std::string serialize_label(std::string_view label);

bool labels_match(const Prediction& prediction, std::string_view gold);

}  // namespace ensprompt
