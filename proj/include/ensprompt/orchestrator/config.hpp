#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ensprompt/core/types.hpp"
#include "ensprompt/ensemble/weights.hpp"
#include "ensprompt/generators/generators.hpp"
#include "ensprompt/llm/http_client.hpp"
#include "ensprompt/search/bandit.hpp"

namespace ensprompt {

inline constexpr int kConfigSchemaVersion = 1;

enum class WeightFitSplit { dev, train, test };
enum class BudgetSplit { shared, independent };

struct ModelConfig {
  std::string provider = "scripted";  // "scripted" | "http"
  std::string model = "task-model";
  double temperature = 0.0;
  int max_output = 1024;
  HttpSettings http;
};

struct EmbeddingConfig {
  std::string provider = "hashing";  // "hashing" | "http"
  std::size_t dimension = 256;
  std::size_t ngram = 3;
  HttpSettings http;
};

struct DataConfig {
  std::string train;
  std::string dev;   // empty: carve dev_fraction out of train
  std::string test;
  std::vector<Label> label_space;
  Metric metric = Metric::macro_f1;
  double dev_fraction = 0.2;
  WeightFitSplit weight_fit = WeightFitSplit::dev;
  double eval_subsample = 1.0;
};

struct GeneratorConfig {
  std::size_t bad_case = 10;
  std::size_t evolutionary = 5;
  std::size_t zero_order = 2;  // part of `evolutionary`; the rest are mutations
  std::size_t hard_case = 1;
  std::size_t hard_case_k = 5;
  ReflectionOptions reflection;
};

struct SearchConfig {
  double xi = 0.01;
  std::size_t clusters = 5;
  double exploration = 1.4142135623730951;
  std::size_t top_arms = 3;
  UcbLogMode log_mode = UcbLogMode::total_pulls;
  BudgetSplit budget_split = BudgetSplit::shared;
  std::size_t bayes_budget = 0;  // independent split only
  std::size_t mab_budget = 0;    // independent split only
  double gpr_noise = 1e-4;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 0;
  std::size_t iterations = 3;
  std::size_t population_size = 5;
  std::size_t budget = 8;  // candidate evaluations per iteration
  std::vector<std::string> seed_prompts;
  DataConfig data;
  GeneratorConfig generators;
  SearchConfig search;
  EnsembleConfig ensemble;
  ModelConfig task;
  ModelConfig optimizer;
  EmbeddingConfig embedding;
  std::string script;         // scripted-client file for offline runs
  std::string templates_dir;  // empty: built-in templates
  std::string artifact_dir = "runs/latest";

  // Per-iteration search budget. The bandit gets T_s = ceil(share / |S_K|)
  // steps of |S_K| pulls; in shared mode Bayes gets what is left, so the two
  // never evaluate more than `budget` new candidates together.
  std::size_t mab_arms() const;
  std::size_t mab_steps() const;
  std::size_t mab_budget() const;  // T_s * |S_K| pulls
  std::size_t bayes_budget() const;
  std::size_t evaluation_budget() const;
};

nlohmann::json default_config_json();

// Parses and validates. Relative paths resolve against `base_dir`.
// Throws ConfigError listing every problem (unknown keys, wrong types,
// out-of-range values, missing required keys).
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const RunConfig& config);

// Every problem with `doc`; empty when valid.
std::vector<std::string> validate_config(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

// "a.b.c=value": value parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace ensprompt
