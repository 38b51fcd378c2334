#pragma once

#include <string>

#include <json.hpp>

#include "ensprompt/orchestrator/config.hpp"
#include "ensprompt/orchestrator/state.hpp"

namespace ensprompt {

inline constexpr int kReportFormatVersion = 1;

// Deterministic summary of a run. Wall time is deliberately absent (see
// timing.json) so same-seed runs produce identical bytes.
nlohmann::json build_report(const RunConfig& config, const RunState& state);

// Fixed-layout text table for `ensprompt report`.
std::string render_report(const nlohmann::json& report);

}  // namespace ensprompt
