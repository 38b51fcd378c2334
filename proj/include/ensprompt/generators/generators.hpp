#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ensprompt/core/pool.hpp"
#include "ensprompt/core/types.hpp"
#include "ensprompt/generators/templates.hpp"
#include "ensprompt/generators/tracker.hpp"
#include "ensprompt/llm/client.hpp"
#include "ensprompt/llm/evaluator.hpp"
#include "ensprompt/rng.hpp"

namespace ensprompt {

inline constexpr std::string_view kFewShotHeader = "# Few-Shot Exemplars (from high-scoring failures)";

struct OptimizerSettings {
  std::string model_id = "optimizer-model";
  double temperature = 0.7;
  int max_output = 2048;
};

// Everything a generator needs besides its own inputs.
struct GeneratorContext {
  ChatClient& optimizer;
  const TemplateSet& templates;
  Rng& rng;
  std::function<std::string()> next_id;
  OptimizerSettings settings = {};
};

struct BadCase {
  Example example;
  std::string wrong_output;
};

struct ReflectionOptions {
  std::size_t iterations = 3;     // T
  std::size_t sample_size = 8;    // |B_s| cap
  std::size_t max_exemplars = 6;  // few-shot block cap
};

struct ReflectionResult {
  PromptCandidate candidate;
  std::size_t rounds = 0;              // optimizer calls made
  std::vector<BadCase> unresolved;     // final B_s
};

// Reflect on a sample of the prompt's bad cases, asking the optimizer for a
// better prompt up to T times and re-checking the sample after each
// rewrite; stops early once the sample is solved. Cases still failing at the
// end are appended as a few-shot block.
ReflectionResult bad_case_reflection(const PromptCandidate& prompt, std::span<const BadCase> bad_cases,
                                     const ReflectionOptions& options, GeneratorContext& context,
                                     Evaluator& evaluator);

std::string few_shot_block(std::span<const BadCase> cases, std::size_t max_exemplars);

// Fitness-proportional over scores; uniform if no candidate has a
// positive score. Missing scores count as 0.
std::size_t select_parent(std::span<const PromptCandidate> population, Rng& rng);

struct EvolutionResult {
  std::vector<PromptCandidate> candidates;
  std::size_t shortfall = 0;  // requested minus returned (duplicates / empty outputs)
};

// s1 direct mutations of sampled parents plus s2 zero-order prompts built
// from a summary of the whole population.
EvolutionResult evolutionary_reflection(std::span<const PromptCandidate> population, std::size_t s1,
                                        std::size_t s2, GeneratorContext& context);

struct HardCaseItem {
  Example example;
  std::size_t failure_count = 0;
  std::vector<std::string> failed_prompt_texts;
};

// Top-k tracker entries (count desc, id asc) resolved against the examples
// and pool. Entries whose example is unknown are skipped.
std::vector<HardCaseItem> build_hard_case_dataset(const BadCaseTracker& tracker, std::span<const Example> examples,
                                                  const CandidatePool& pool, std::size_t k);

struct HardCaseResult {
  PromptCandidate candidate;
  std::vector<HardCaseItem> dataset;
};

HardCaseResult hard_case_tracking(const BadCaseTracker& tracker, std::span<const PromptCandidate> population,
                                  std::span<const Example> examples, const CandidatePool& pool, std::size_t k,
                                  GeneratorContext& context);

}  // namespace ensprompt
