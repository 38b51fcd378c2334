#include "ensprompt/orchestrator/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

std::string resolve_path(const std::string& path, const std::filesystem::path& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (base_dir / p).lexically_normal().string();
}

json nullable(const std::string& text) { return text.empty() ? json(nullptr) : json(text); }

json http_to_json(const HttpSettings& http) {
  return json{{"base_url", http.base_url},
              {"chat_path", http.chat_path},
              {"embeddings_path", http.embeddings_path},
              {"api_key_env", nullable(http.api_key_env)},
              {"timeout_seconds", http.timeout_seconds},
              {"max_retries", http.max_retries},
              {"backoff_initial_ms", http.backoff_initial.count()},
              {"backoff_max_ms", http.backoff_max.count()},
              {"max_in_flight", http.max_in_flight}};
}

json model_to_json(const ModelConfig& model) {
  json out = http_to_json(model.http);
  out["provider"] = model.provider;
  out["model"] = model.model;
  out["temperature"] = model.temperature;
  out["max_output"] = model.max_output;
  return out;
}

// Walks a parsed document, collecting one message per problem.
class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  const json* find(const std::string& path) const {
    const json* node = &doc_;
    std::size_t begin = 0;
    while (begin <= path.size()) {
      const auto dot = path.find('.', begin);
      const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      begin = dot + 1;
    }
    return node;
  }

  void fail(const std::string& path, const std::string& why) { problems.push_back(path + ": " + why); }

  const json* present(const std::string& path) {
    const json* node = find(path);
    return node == nullptr || node->is_null() ? nullptr : node;
  }

  void count(const std::string& path, std::size_t& out, std::size_t minimum = 0) {
    const json* node = present(path);
    if (node == nullptr) return;
    if (!node->is_number_integer() || (node->is_number_integer() && node->get<long long>() < 0)) {
      fail(path, "expected a non-negative integer");
      return;
    }
    const auto value = node->get<std::size_t>();
    if (value < minimum) {
      fail(path, "must be >= " + std::to_string(minimum) + " (got " + std::to_string(value) + ")");
      return;
    }
    out = value;
  }

  void integer(const std::string& path, int& out, int minimum) {
    const json* node = present(path);
    if (node == nullptr) return;
    if (!node->is_number_integer()) {
      fail(path, "expected an integer");
      return;
    }
    const auto value = node->get<long long>();
    if (value < minimum) {
      fail(path, "must be >= " + std::to_string(minimum));
      return;
    }
    out = static_cast<int>(value);
  }

  template <typename Check>
  void real(const std::string& path, double& out, Check&& check, const char* requirement) {
    const json* node = present(path);
    if (node == nullptr) return;
    if (!node->is_number()) {
      fail(path, "expected a number");
      return;
    }
    const double value = node->get<double>();
    if (!std::isfinite(value) || !check(value)) {
      fail(path, std::string("must be ") + requirement);
      return;
    }
    out = value;
  }

  void text(const std::string& path, std::string& out) {
    const json* node = present(path);
    if (node == nullptr) return;
    if (!node->is_string()) {
      fail(path, "expected a string");
      return;
    }
    out = node->get<std::string>();
  }

  template <typename T>
  void choice(const std::string& path, T& out, std::initializer_list<std::pair<const char*, T>> options) {
    const json* node = present(path);
    if (node == nullptr) return;
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (node->is_string() && node->get<std::string>() == name) {
        out = value;
        return;
      }
      allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    fail(path, "expected one of: " + allowed);
  }

  void strings(const std::string& path, std::vector<std::string>& out) {
    const json* node = present(path);
    if (node == nullptr) return;
    if (!node->is_array()) {
      fail(path, "expected a list of strings");
      return;
    }
    std::vector<std::string> values;
    for (const auto& item : *node) {
      if (!item.is_string()) {
        fail(path, "expected a list of strings");
        return;
      }
      values.push_back(item.get<std::string>());
    }
    out = std::move(values);
  }

  void unknown_keys(const json& node, const json& reference, const std::string& prefix) {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (!reference.is_object() || !reference.contains(key)) {
        fail(path, "unknown key");
        continue;
      }
      const json& expected = reference[key];
      if (expected.is_object()) {
        if (!value.is_object()) {
          fail(path, "expected an object");
        } else {
          unknown_keys(value, expected, path);
        }
      }
    }
  }

  std::vector<std::string> problems;

 private:
  const json& doc_;
};

void read_http(Reader& r, const std::string& prefix, HttpSettings& http) {
  r.text(prefix + ".base_url", http.base_url);
  r.text(prefix + ".chat_path", http.chat_path);
  r.text(prefix + ".embeddings_path", http.embeddings_path);
  r.text(prefix + ".api_key_env", http.api_key_env);
  r.real(prefix + ".timeout_seconds", http.timeout_seconds, [](double v) { return v > 0.0; }, "> 0");
  r.integer(prefix + ".max_retries", http.max_retries, 0);
  std::size_t initial = static_cast<std::size_t>(http.backoff_initial.count());
  std::size_t maximum = static_cast<std::size_t>(http.backoff_max.count());
  r.count(prefix + ".backoff_initial_ms", initial);
  r.count(prefix + ".backoff_max_ms", maximum);
  http.backoff_initial = std::chrono::milliseconds(initial);
  http.backoff_max = std::chrono::milliseconds(maximum);
  r.count(prefix + ".max_in_flight", http.max_in_flight, 1);
}

void read_model(Reader& r, const std::string& prefix, ModelConfig& model) {
  r.choice<std::string>(prefix + ".provider", model.provider, {{"scripted", "scripted"}, {"http", "http"}});
  r.text(prefix + ".model", model.model);
  r.real(prefix + ".temperature", model.temperature, [](double v) { return v >= 0.0; }, ">= 0");
  r.integer(prefix + ".max_output", model.max_output, 1);
  read_http(r, prefix, model.http);
  model.http.model = model.model;
}

}  // namespace

namespace {

std::size_t mab_share(const RunConfig& c) {
  return c.search.budget_split == BudgetSplit::independent ? c.search.mab_budget : c.budget / 2;
}

}  // namespace

std::size_t RunConfig::mab_arms() const { return std::min(search.top_arms, mab_share(*this)); }

std::size_t RunConfig::mab_steps() const {
  const std::size_t arms = mab_arms();
  return arms == 0 ? 0 : (mab_share(*this) + arms - 1) / arms;
}

std::size_t RunConfig::mab_budget() const { return mab_steps() * mab_arms(); }

std::size_t RunConfig::bayes_budget() const {
  if (search.budget_split == BudgetSplit::independent) return search.bayes_budget;
  return budget - mab_budget();
}

std::size_t RunConfig::evaluation_budget() const { return bayes_budget() + mab_budget(); }

json config_to_json(const RunConfig& c) {
  json out;
  out["schema_version"] = c.schema_version;
  out["seed"] = c.seed;
  out["iterations"] = c.iterations;
  out["population_size"] = c.population_size;
  out["budget"] = c.budget;
  out["seed_prompts"] = c.seed_prompts;
  out["data"] = {{"train", nullable(c.data.train)},
                 {"dev", nullable(c.data.dev)},
                 {"test", nullable(c.data.test)},
                 {"label_space", c.data.label_space},
                 {"metric", to_string(c.data.metric)},
                 {"dev_fraction", c.data.dev_fraction},
                 {"weight_fit", c.data.weight_fit == WeightFitSplit::dev     ? "dev"
                                : c.data.weight_fit == WeightFitSplit::train ? "train"
                                                                             : "test"},
                 {"eval_subsample", c.data.eval_subsample}};
  out["generators"] = {{"bad_case", c.generators.bad_case},
                       {"evolutionary", c.generators.evolutionary},
                       {"zero_order", c.generators.zero_order},
                       {"hard_case", c.generators.hard_case},
                       {"hard_case_k", c.generators.hard_case_k},
                       {"reflection_iterations", c.generators.reflection.iterations},
                       {"bad_case_sample", c.generators.reflection.sample_size},
                       {"few_shot_max", c.generators.reflection.max_exemplars}};
  out["search"] = {{"xi", c.search.xi},
                   {"K", c.search.clusters},
                   {"c", c.search.exploration},
                   {"top_arm_count", c.search.top_arms},
                   {"ucb_log", c.search.log_mode == UcbLogMode::total_pulls ? "total_pulls" : "step_index"},
                   {"budget_split", c.search.budget_split == BudgetSplit::shared ? "shared" : "independent"},
                   {"bayes_budget", c.search.bayes_budget},
                   {"mab_budget", c.search.mab_budget},
                   {"gpr_noise", c.search.gpr_noise}};
  out["ensemble"] = {{"M", c.ensemble.members},
                     {"lambda", c.ensemble.lambda},
                     {"w_min", c.ensemble.min_weight},
                     {"random_starts", c.ensemble.random_starts}};
  json embedding = http_to_json(c.embedding.http);
  embedding["provider"] = c.embedding.provider;
  embedding["model"] = c.embedding.http.model;
  embedding["dimension"] = c.embedding.dimension;
  embedding["ngram"] = c.embedding.ngram;
  out["models"] = {{"task", model_to_json(c.task)},
                   {"optimizer", model_to_json(c.optimizer)},
                   {"embedding", std::move(embedding)}};
  out["script"] = nullable(c.script);
  out["templates_dir"] = nullable(c.templates_dir);
  out["artifact_dir"] = c.artifact_dir;
  return out;
}

json default_config_json() {
  RunConfig defaults;
  defaults.optimizer.model = "optimizer-model";
  defaults.optimizer.temperature = 0.7;
  defaults.optimizer.max_output = 2048;
  defaults.embedding.http.model = "embedding-model";
  return config_to_json(defaults);
}

std::vector<std::string> validate_config(const json& doc) {
  try {
    config_from_json(doc);
    return {};
  } catch (const ConfigError& e) {
    return e.problems();
  }
}

RunConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError({"<root>: configuration must be a JSON object"});
  const json defaults = default_config_json();
  Reader r(doc);
  r.unknown_keys(doc, defaults, "");

  RunConfig c;
  c.optimizer.model = "optimizer-model";
  c.optimizer.temperature = 0.7;
  c.optimizer.max_output = 2048;
  c.embedding.http.model = "embedding-model";

  if (const json* version = r.present("schema_version")) {
    if (!version->is_number_integer() || version->get<long long>() != kConfigSchemaVersion) {
      r.fail("schema_version", "expected " + std::to_string(kConfigSchemaVersion) + ", found " + version->dump());
    }
  }
  if (const json* seed = r.present("seed")) {
    if (!seed->is_number_integer() || seed->get<long long>() < 0) {
      r.fail("seed", "expected a non-negative integer");
    } else {
      c.seed = seed->get<std::uint64_t>();
    }
  }
  r.count("iterations", c.iterations, 1);
  r.count("population_size", c.population_size, 1);
  r.count("budget", c.budget, 1);
  r.strings("seed_prompts", c.seed_prompts);
  if (c.seed_prompts.empty()) r.fail("seed_prompts", "at least one seed prompt is required");
  for (const auto& prompt : c.seed_prompts) {
    if (prompt.find_first_not_of(" \t\r\n") == std::string::npos) {
      r.fail("seed_prompts", "seed prompts must be non-empty");
      break;
    }
  }

  r.text("data.train", c.data.train);
  r.text("data.dev", c.data.dev);
  r.text("data.test", c.data.test);
  if (c.data.train.empty()) r.fail("data.train", "required dataset path is missing");
  if (c.data.test.empty()) r.fail("data.test", "required dataset path is missing");
  r.strings("data.label_space", c.data.label_space);
  r.choice<Metric>("data.metric", c.data.metric, {{"macro_f1", Metric::macro_f1}, {"accuracy", Metric::accuracy}});
  r.real("data.dev_fraction", c.data.dev_fraction, [](double v) { return v > 0.0 && v < 1.0; }, "in (0, 1)");
  r.choice<WeightFitSplit>("data.weight_fit", c.data.weight_fit,
                           {{"dev", WeightFitSplit::dev}, {"train", WeightFitSplit::train}, {"test", WeightFitSplit::test}});
  r.real("data.eval_subsample", c.data.eval_subsample, [](double v) { return v > 0.0 && v <= 1.0; }, "in (0, 1]");
  try {
    LabelSpace check(c.data.label_space);
  } catch (const ContractViolation& e) {
    r.fail("data.label_space", e.what());
  }

  r.count("generators.bad_case", c.generators.bad_case);
  r.count("generators.evolutionary", c.generators.evolutionary);
  r.count("generators.zero_order", c.generators.zero_order);
  r.count("generators.hard_case", c.generators.hard_case);
  r.count("generators.hard_case_k", c.generators.hard_case_k, 1);
  r.count("generators.reflection_iterations", c.generators.reflection.iterations, 1);
  r.count("generators.bad_case_sample", c.generators.reflection.sample_size, 1);
  r.count("generators.few_shot_max", c.generators.reflection.max_exemplars);
  if (c.generators.zero_order > c.generators.evolutionary) {
    r.fail("generators.zero_order", "cannot exceed generators.evolutionary");
  }

  r.real("search.xi", c.search.xi, [](double v) { return v >= 0.0; }, ">= 0");
  r.count("search.K", c.search.clusters, 1);
  r.real("search.c", c.search.exploration, [](double v) { return v >= 0.0; }, ">= 0");
  r.count("search.top_arm_count", c.search.top_arms, 1);
  r.choice<UcbLogMode>("search.ucb_log", c.search.log_mode,
                       {{"total_pulls", UcbLogMode::total_pulls}, {"step_index", UcbLogMode::step_index}});
  r.choice<BudgetSplit>("search.budget_split", c.search.budget_split,
                        {{"shared", BudgetSplit::shared}, {"independent", BudgetSplit::independent}});
  r.count("search.bayes_budget", c.search.bayes_budget);
  r.count("search.mab_budget", c.search.mab_budget);
  r.real("search.gpr_noise", c.search.gpr_noise, [](double v) { return v >= 0.0; }, ">= 0");
  if (c.search.budget_split == BudgetSplit::independent && c.search.bayes_budget + c.search.mab_budget == 0) {
    r.fail("search.bayes_budget", "independent budgets must not both be zero");
  }

  r.count("ensemble.M", c.ensemble.members, 1);
  r.real("ensemble.lambda", c.ensemble.lambda, [](double v) { return v >= 0.0; }, ">= 0");
  r.real("ensemble.w_min", c.ensemble.min_weight, [](double v) { return v > 0.0; }, "> 0");
  r.count("ensemble.random_starts", c.ensemble.random_starts);
  if (static_cast<double>(c.ensemble.members) * c.ensemble.min_weight > 1.0 + 1e-12) {
    r.fail("ensemble.w_min", "M * w_min must not exceed 1");
  }

  read_model(r, "models.task", c.task);
  read_model(r, "models.optimizer", c.optimizer);
  r.choice<std::string>("models.embedding.provider", c.embedding.provider,
                        {{"hashing", "hashing"}, {"http", "http"}});
  r.text("models.embedding.model", c.embedding.http.model);
  r.count("models.embedding.dimension", c.embedding.dimension, 1);
  r.count("models.embedding.ngram", c.embedding.ngram, 1);
  read_http(r, "models.embedding", c.embedding.http);

  r.text("script", c.script);
  r.text("templates_dir", c.templates_dir);
  r.text("artifact_dir", c.artifact_dir);
  if (c.artifact_dir.empty()) r.fail("artifact_dir", "must not be empty");
  const bool scripted = c.task.provider == "scripted" || c.optimizer.provider == "scripted";
  if (scripted && c.script.empty()) {
    r.fail("script", "a scripted model provider needs a script file (config key 'script' or --scripted)");
  }

  if (!r.problems.empty()) throw ConfigError(r.problems);

  c.data.train = resolve_path(c.data.train, base_dir);
  c.data.dev = resolve_path(c.data.dev, base_dir);
  c.data.test = resolve_path(c.data.test, base_dir);
  c.script = resolve_path(c.script, base_dir);
  c.templates_dir = resolve_path(c.templates_dir, base_dir);
  c.artifact_dir = resolve_path(c.artifact_dir, base_dir);
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw LoadError("'" + path.string() + "' is not valid JSON");
  return doc;
}

RunConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), std::filesystem::absolute(path).parent_path());
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({"--set '" + assignment + "': expected KEY=VALUE"});
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (key.empty()) throw ConfigError({"--set '" + assignment + "': empty key segment"});
    if (!node->is_object()) throw ConfigError({"--set '" + assignment + "': '" + key + "' is not inside an object"});
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    begin = dot + 1;
  }
}

}  // namespace ensprompt
