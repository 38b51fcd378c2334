#include "ensprompt/generators/generators.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

namespace {

// Past this many, a hard case lists only a count of further failing prompts.
constexpr std::size_t kFailedPromptsShown = 5;

std::string format_score(const std::optional<double>& score) {
  if (!score) return "unscored";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", *score);
  return buffer;
}

std::string ask_optimizer(GeneratorContext& context, const std::string& meta_prompt) {
  ChatRequest request;
  request.user_text = meta_prompt;
  request.temperature = context.settings.temperature;
  request.max_output = context.settings.max_output;
  request.model_id = context.settings.model_id;
  return trim(context.optimizer.complete(request));
}

std::string render_bad_cases(std::span<const BadCase> cases) {
  std::string out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (i > 0) out += "\n";
    out += "[Case " + std::to_string(i + 1) + "]\n";
    out += "Input: " + cases[i].example.input + "\n";
    out += "Expected: " + cases[i].example.expected + "\n";
    out += "Model output: " + cases[i].wrong_output + "\n";
  }
  return out;
}

std::vector<const PromptCandidate*> ranked(std::span<const PromptCandidate> population) {
  std::vector<const PromptCandidate*> out;
  for (const auto& c : population) out.push_back(&c);
  std::stable_sort(out.begin(), out.end(), [](const PromptCandidate* a, const PromptCandidate* b) {
    const double sa = a->score.value_or(-1.0);
    const double sb = b->score.value_or(-1.0);
    if (sa != sb) return sa > sb;
    return a->id < b->id;
  });
  return out;
}

}  // namespace

std::string few_shot_block(std::span<const BadCase> cases, std::size_t max_exemplars) {
  const std::size_t shown = std::min(cases.size(), max_exemplars);
  if (shown == 0) return {};
  std::string out(kFewShotHeader);
  out += "\n";
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += "\n";
    out += "[Example " + std::to_string(i + 1) + "]\n";
    out += "Input: " + cases[i].example.input + "\n";
    out += "Expected: " + cases[i].example.expected + "\n";
  }
  return out;
}

ReflectionResult bad_case_reflection(const PromptCandidate& prompt, std::span<const BadCase> bad_cases,
                                     const ReflectionOptions& options, GeneratorContext& context,
                                     Evaluator& evaluator) {
  if (options.iterations < 1) throw ContractViolation("bad_case_reflection: T must be >= 1");
  ReflectionResult result;
  result.candidate.id = context.next_id();
  result.candidate.origin = Origin::bad_case_reflection;
  result.candidate.text = prompt.text;
  if (bad_cases.empty()) return result;

  std::vector<BadCase> sample;
  for (auto index : context.rng.sample_without_replacement(
           bad_cases.size(), std::min(bad_cases.size(), options.sample_size))) {
    sample.push_back(bad_cases[index]);
  }

  std::string current = prompt.text;
  for (std::size_t round = 0; round < options.iterations && !sample.empty(); ++round) {
    const std::string meta = context.templates.bad_case_reflection.render(
        {{"current_prompt", current}, {"bad_cases", render_bad_cases(sample)}});
    std::string rewritten = ask_optimizer(context, meta);
    ++result.rounds;
    if (rewritten.empty()) {
      throw GenerationError("bad_case_reflection: optimizer returned an empty prompt");
    }
    current = std::move(rewritten);

    std::vector<Example> examples;
    for (const auto& bad : sample) examples.push_back(bad.example);
    PromptCandidate probe{result.candidate.id, current, Origin::bad_case_reflection, {}, {}};
    const EvaluationRecord record = evaluator.evaluate(probe, examples);
    std::vector<BadCase> still_failing;
    for (std::size_t i = 0; i < record.per_example.size(); ++i) {
      if (!record.per_example[i].correct) {
        still_failing.push_back({examples[i], record.per_example[i].raw_output});
      }
    }
    sample = std::move(still_failing);
  }

  const std::string block = few_shot_block(sample, options.max_exemplars);
  result.candidate.text = block.empty() ? current : current + "\n\n" + block;
  result.unresolved = std::move(sample);
  return result;
}

std::size_t select_parent(std::span<const PromptCandidate> population, Rng& rng) {
  if (population.empty()) throw ContractViolation("select_parent: empty population");
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& candidate : population) {
    const double w = std::max(candidate.score.value_or(0.0), 0.0);
    weights.push_back(w);
    total += w;
  }
  if (total <= 0.0) return rng.index(population.size());
  return rng.weighted_index(weights);
}

EvolutionResult evolutionary_reflection(std::span<const PromptCandidate> population, std::size_t s1,
                                        std::size_t s2, GeneratorContext& context) {
  if (population.empty()) throw ContractViolation("evolutionary_reflection: empty population");
  EvolutionResult result;
  std::set<std::string> seen;
  for (const auto& candidate : population) seen.insert(normalize_prompt_text(candidate.text));

  auto keep = [&](std::string text, Origin origin) {
    if (text.empty() || !seen.insert(normalize_prompt_text(text)).second) {
      ++result.shortfall;
      return;
    }
    result.candidates.push_back({context.next_id(), std::move(text), origin, {}, {}});
  };

  for (std::size_t i = 0; i < s1; ++i) {
    const PromptCandidate& parent = population[select_parent(population, context.rng)];
    const std::string meta = context.templates.mutation.render(
        {{"current_prompt", parent.text}, {"score", format_score(parent.score)}});
    keep(ask_optimizer(context, meta), Origin::evolutionary_mutation);
  }

  if (s2 > 0) {
    std::string summary;
    std::size_t rank = 0;
    for (const auto* candidate : ranked(population)) {
      if (rank > 0) summary += "\n";
      summary += "[Prompt " + std::to_string(++rank) + "] (score: " + format_score(candidate->score) + ")\n";
      summary += candidate->text + "\n";
    }
    const std::string meta = context.templates.zero_order.render({{"population_summary", summary}});
    for (std::size_t i = 0; i < s2; ++i) {
      keep(ask_optimizer(context, meta), Origin::evolutionary_zero_order);
    }
  }
  return result;
}

std::vector<HardCaseItem> build_hard_case_dataset(const BadCaseTracker& tracker, std::span<const Example> examples,
                                                  const CandidatePool& pool, std::size_t k) {
  std::map<std::string, const Example*> by_id;
  for (const auto& example : examples) by_id.emplace(example.id, &example);

  std::vector<HardCaseItem> items;
  for (const auto& [example_id, entry] : tracker.top(tracker.size())) {
    if (items.size() == k) break;
    auto it = by_id.find(example_id);
    if (it == by_id.end()) continue;
    HardCaseItem item{*it->second, entry.failure_count, {}};
    for (const auto& prompt_id : entry.failed_prompt_ids) {
      if (const auto* candidate = pool.find(prompt_id)) item.failed_prompt_texts.push_back(candidate->text);
    }
    items.push_back(std::move(item));
  }
  return items;
}

HardCaseResult hard_case_tracking(const BadCaseTracker& tracker, std::span<const PromptCandidate> population,
                                  std::span<const Example> examples, const CandidatePool& pool, std::size_t k,
                                  GeneratorContext& context) {
  if (tracker.empty()) throw ContractViolation("hard_case_tracking: bad-case tracker is empty");
  if (k < 1) throw ContractViolation("hard_case_tracking: k must be >= 1");

  HardCaseResult result;
  result.dataset = build_hard_case_dataset(tracker, examples, pool, k);

  std::string cases;
  for (std::size_t i = 0; i < result.dataset.size(); ++i) {
    const auto& item = result.dataset[i];
    if (i > 0) cases += "\n";
    cases += "[Hard Case " + std::to_string(i + 1) + "] failed " + std::to_string(item.failure_count) +
             (item.failure_count == 1 ? " time\n" : " times\n");
    cases += "Input: " + item.example.input + "\n";
    cases += "Expected: " + item.example.expected + "\n";
    cases += "Failed prompts:\n";
    const std::size_t shown = std::min(item.failed_prompt_texts.size(), kFailedPromptsShown);
    for (std::size_t j = 0; j < shown; ++j) cases += "- " + item.failed_prompt_texts[j] + "\n";
    if (item.failed_prompt_texts.size() > shown) {
      cases += "- (" + std::to_string(item.failed_prompt_texts.size() - shown) + " more)\n";
    }
  }

  const auto order = ranked(population);
  const std::string current = order.empty() ? std::string("(none)") : order.front()->text;
  const std::string meta =
      context.templates.hard_case.render({{"hard_cases", cases}, {"current_prompt", current}});
  std::string text = ask_optimizer(context, meta);
  if (text.empty()) throw GenerationError("hard_case_tracking: optimizer returned an empty prompt");
  result.candidate = {context.next_id(), std::move(text), Origin::hard_case_tracking, {}, {}};
  return result;
}

}  // namespace ensprompt
