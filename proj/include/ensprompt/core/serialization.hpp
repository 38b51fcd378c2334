#pragma once

#include <json.hpp>

#include "ensprompt/core/types.hpp"

namespace ensprompt {

// INVALID predictions serialize as JSON null.
nlohmann::json prediction_to_json(const Prediction& prediction);
Prediction prediction_from_json(const nlohmann::json& value);

void to_json(nlohmann::json& out, const PromptCandidate& candidate);
void from_json(const nlohmann::json& in, PromptCandidate& candidate);

void to_json(nlohmann::json& out, const Example& example);
void from_json(const nlohmann::json& in, Example& example);

void to_json(nlohmann::json& out, const EvaluationRecord& record);
void from_json(const nlohmann::json& in, EvaluationRecord& record);

}  // namespace ensprompt
