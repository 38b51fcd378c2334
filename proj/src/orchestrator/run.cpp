#include "ensprompt/orchestrator/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "ensprompt/core/dataset.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/ensemble/voting.hpp"
#include "ensprompt/ensemble/weights.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/generators/generators.hpp"
#include "ensprompt/llm/embedder.hpp"
#include "ensprompt/llm/http_client.hpp"
#include "ensprompt/llm/scripted_client.hpp"
#include "ensprompt/orchestrator/report.hpp"
#include "ensprompt/search/bandit.hpp"
#include "ensprompt/search/bayes.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

// Keeps the subsample stream apart from the run stream seeded with the same value.
constexpr std::uint64_t kSubsampleSalt = 0x5eed5a3b1e000001ULL;

std::vector<Example> load_checked(const std::string& path, const LabelSpace& labels, Metric metric) {
  Dataset dataset{load_jsonl(path), labels, metric};
  try {
    dataset.validate();
  } catch (const ContractViolation& e) {
    throw LoadError("'" + path + "': " + e.what());
  }
  return std::move(dataset.examples);
}

bool better(const PromptCandidate& a, const PromptCandidate& b) {
  const double sa = a.score.value_or(-1.0);
  const double sb = b.score.value_or(-1.0);
  if (sa != sb) return sa > sb;
  return a.id < b.id;
}

std::vector<PromptCandidate> ranked_evaluated(const CandidatePool& pool) {
  auto out = pool.evaluated();
  std::sort(out.begin(), out.end(), better);
  return out;
}

std::vector<Prediction> column(const PredictionMatrix& matrix, std::size_t j) {
  std::vector<Prediction> out;
  out.reserve(matrix.rows());
  for (const auto& row : matrix.cells) out.push_back(row[j]);
  return out;
}

std::vector<Label> golds_of(std::span<const Example> examples) {
  std::vector<Label> out;
  out.reserve(examples.size());
  for (const auto& example : examples) out.push_back(example.expected);
  return out;
}

bool is_role_split(const json& script) {
  if (!script.is_object()) return false;
  for (const char* key : {"queue", "keyed", "rules", "default"}) {
    if (script.contains(key)) return false;
  }
  return script.contains("task") || script.contains("optimizer");
}

}  // namespace

TaskData load_task_data(const RunConfig& config) {
  TaskData data;
  data.label_space = LabelSpace(config.data.label_space);
  data.metric = config.data.metric;

  auto train = load_checked(config.data.train, data.label_space, data.metric);
  if (config.data.weight_fit == WeightFitSplit::dev) {
    if (!config.data.dev.empty()) {
      data.dev = load_checked(config.data.dev, data.label_space, data.metric);
    } else {
      if (train.size() < 2) {
        throw LoadError("'" + config.data.train + "': at least 2 examples are needed to carve out a dev split");
      }
      auto split = split_holdout(train, config.data.dev_fraction, config.seed);
      train = std::move(split.first);
      data.dev = std::move(split.second);
    }
  }
  data.train = std::move(train);
  data.test = load_checked(config.data.test, data.label_space, data.metric);

  if (config.data.eval_subsample < 1.0) {
    const auto n = data.train.size();
    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.data.eval_subsample * static_cast<double>(n))), 1, n);
    Rng rng(config.seed ^ kSubsampleSalt);
    auto picks = rng.sample_without_replacement(n, k);
    std::sort(picks.begin(), picks.end());
    for (auto index : picks) data.eval.push_back(data.train[index]);
  } else {
    data.eval = data.train;
  }
  return data;
}

std::unique_ptr<ChatClient> make_chat_client(const ModelConfig& model, const std::string& role,
                                             const json* script) {
  if (model.provider == "http") return std::make_unique<HttpChatClient>(model.http);
  if (script == nullptr) {
    throw ConfigError({"script: models." + role + " uses the scripted provider but no script was given"});
  }
  if (is_role_split(*script)) {
    if (!script->contains(role)) throw ConfigError({"script: no entry for role '" + role + "'"});
    return ScriptedClient::from_json((*script)[role]);
  }
  return ScriptedClient::from_json(*script);
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingConfig& config) {
  if (config.provider == "http") return std::make_unique<HttpEmbedder>(config.http);
  return std::make_unique<HashingEmbedder>(config.dimension, config.ngram);
}

Orchestrator::Orchestrator(RunConfig config, TaskData data, ChatClient& task, ChatClient& optimizer,
                           Embedder& embedder, CallLog& log, TemplateSet templates)
    : config_(std::move(config)),
      data_(std::move(data)),
      task_(task),
      optimizer_(optimizer),
      embedder_(embedder),
      log_(log),
      templates_(std::move(templates)),
      evaluator_(task, data_.label_space, data_.metric,
                 TaskModelSettings{config_.task.model, config_.task.temperature, config_.task.max_output}) {
  state_.rng = Rng(config_.seed);
}

std::string Orchestrator::next_id() { return make_candidate_id(++state_.next_id); }

bool Orchestrator::admit(PromptCandidate candidate, std::map<std::string, std::size_t>& generated) {
  if (candidate.text.empty() || state_.pool.contains_text(candidate.text)) return false;
  candidate.embedding = embedder_.embed(candidate.text);
  const std::string origin(to_string(candidate.origin));
  if (!state_.pool.insert(std::move(candidate))) return false;
  ++generated[origin];
  return true;
}

double Orchestrator::evaluate_candidate(const std::string& id) {
  if (auto it = state_.train_records.find(id); it != state_.train_records.end()) return it->second.aggregate;
  PromptCandidate& candidate = state_.pool.at(id);
  EvaluationRecord record = evaluator_.evaluate(candidate, data_.eval);
  record.prompt_id = id;
  candidate.score = record.aggregate;
  state_.history.push_back({id, record.aggregate});
  state_.tracker.record(record);
  const double score = record.aggregate;
  state_.train_records.emplace(id, std::move(record));
  return score;
}

void Orchestrator::initialize() {
  state_ = RunState();
  state_.rng = Rng(config_.seed);
  state_.splits = {data_.train.size(), data_.eval.size(), data_.dev.size(), data_.test.size()};
  log_.set_phase("seed_eval");
  std::map<std::string, std::size_t> generated;
  for (const auto& text : config_.seed_prompts) {
    admit(PromptCandidate{next_id(), text, Origin::seed, {}, {}}, generated);
  }
  for (const auto& candidate : state_.pool.candidates()) evaluate_candidate(candidate.id);

  const auto ranked = ranked_evaluated(state_.pool);
  for (std::size_t i = 0; i < ranked.size() && i < config_.population_size; ++i) {
    state_.population.push_back(ranked[i].id);
  }
  sync_bookkeeping();
}

void Orchestrator::restore(RunState state) {
  const SplitSizes current{data_.train.size(), data_.eval.size(), data_.dev.size(), data_.test.size()};
  if (!(state.splits == current)) throw LoadError("run state was produced from different datasets");
  state_ = std::move(state);
  if (state_.client_state.is_object()) {
    if (state_.client_state.contains("task")) task_.restore_state(state_.client_state["task"]);
    if (state_.client_state.contains("optimizer")) optimizer_.restore_state(state_.client_state["optimizer"]);
  }
  log_.restore_counts(state_.call_counts);
}

void Orchestrator::sync_bookkeeping() {
  state_.client_state = json{{"task", task_.save_state()}, {"optimizer", optimizer_.save_state()}};
  state_.call_counts = log_.save_counts();
}

void Orchestrator::step() {
  if (iterations_done()) throw ContractViolation("orchestrator: all iterations already ran");
  IterationSummary summary;
  summary.iteration = state_.iteration + 1;

  // (1) shared generation
  log_.set_phase("generate");
  const auto population = state_.population_candidates();
  GeneratorContext context{optimizer_, templates_, state_.rng, [this] { return next_id(); },
                           OptimizerSettings{config_.optimizer.model, config_.optimizer.temperature,
                                             config_.optimizer.max_output}};

  std::map<std::string, const Example*> eval_by_id;
  for (const auto& example : data_.eval) eval_by_id.emplace(example.id, &example);

  for (std::size_t i = 0; i < config_.generators.bad_case && !population.empty(); ++i) {
    const PromptCandidate& parent = population[i % population.size()];
    std::vector<BadCase> bad;
    for (const auto& outcome : state_.train_records.at(parent.id).per_example) {
      if (!outcome.correct) bad.push_back({*eval_by_id.at(outcome.example_id), outcome.raw_output});
    }
    if (bad.empty()) continue;
    auto result = bad_case_reflection(parent, bad, config_.generators.reflection, context, evaluator_);
    admit(std::move(result.candidate), summary.generated);
  }

  const std::size_t s2 = config_.generators.zero_order;
  const std::size_t s1 = config_.generators.evolutionary - s2;
  if (s1 + s2 > 0 && !population.empty()) {
    auto evolved = evolutionary_reflection(population, s1, s2, context);
    for (auto& candidate : evolved.candidates) admit(std::move(candidate), summary.generated);
  }

  if (!state_.tracker.empty()) {
    for (std::size_t i = 0; i < config_.generators.hard_case; ++i) {
      auto result = hard_case_tracking(state_.tracker, population, data_.eval, state_.pool,
                                       config_.generators.hard_case_k, context);
      admit(std::move(result.candidate), summary.generated);
    }
  }

  // (2) dual search over the unevaluated pool
  std::set<std::string> evaluated_before;
  for (const auto& [id, record] : state_.train_records) evaluated_before.insert(id);

  log_.set_phase("search");
  std::vector<std::string> picks;
  auto add_pick = [&picks](const std::string& id) {
    if (std::find(picks.begin(), picks.end(), id) == picks.end()) picks.push_back(id);
  };
  const auto open = state_.pool.unevaluated();
  const std::size_t bayes_budget = config_.bayes_budget();
  if (!open.empty() && bayes_budget > 0) {
    std::vector<GprPoint> history;
    for (const auto& entry : state_.history) {
      history.push_back({*state_.pool.at(entry.prompt_id).embedding, entry.score});
    }
    const AcquisitionConfig acquisition{config_.search.xi, bayes_budget};
    for (const auto& pick : bayes_select(open, history, acquisition, GprSettings{config_.search.gpr_noise})) {
      summary.bayes_picks.push_back(pick.id);
      add_pick(pick.id);
    }
  }
  const std::size_t mab_budget = config_.mab_budget();
  if (!open.empty() && mab_budget > 0) {
    BanditConfig bandit;
    bandit.clusters = config_.search.clusters;
    bandit.steps = config_.mab_steps();
    bandit.exploration = config_.search.exploration;
    bandit.top_arms = config_.mab_arms();
    bandit.log_mode = config_.search.log_mode;
    bandit.seed = state_.rng.next();
    const auto result =
        mab_select(open, bandit, [this](const PromptCandidate& candidate) { return evaluate_candidate(candidate.id); });
    for (const auto& selection : result.selections) {
      summary.mab_picks.push_back(selection.candidate.id);
      add_pick(selection.candidate.id);
    }
  }

  // (3) evaluate the union
  log_.set_phase("evaluate");
  for (const auto& id : picks) evaluate_candidate(id);
  for (const auto& [id, record] : state_.train_records) {
    if (!evaluated_before.contains(id)) summary.newly_evaluated.push_back(id);
  }

  // (4) next population: top-P, which always keeps the best so far
  const auto ranked = ranked_evaluated(state_.pool);
  state_.population.clear();
  for (std::size_t i = 0; i < ranked.size() && i < config_.population_size; ++i) {
    state_.population.push_back(ranked[i].id);
  }

  summary.best_score = ranked.front().score.value_or(0.0);
  summary.best_id = ranked.front().id;
  summary.population = state_.population;
  summary.pool_size = state_.pool.size();
  summary.evaluated_total = state_.train_records.size();
  state_.trajectory.push_back(std::move(summary));
  ++state_.iteration;
  sync_bookkeeping();
}

void Orchestrator::finish() {
  const auto ranked = ranked_evaluated(state_.pool);
  if (ranked.empty()) throw ContractViolation("orchestrator: no evaluated candidates to ensemble");
  const std::size_t m = config_.ensemble.members;
  // Diversity is sought among the strongest candidates only.
  const std::size_t shortlist = std::min(ranked.size(), std::max(2 * m, config_.population_size));
  const std::vector<PromptCandidate> candidates(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(shortlist));
  const auto members = select_members(candidates, m, state_.rng.next());

  EnsembleConfig ensemble_config = config_.ensemble;
  ensemble_config.validate_for(members.size());

  // Training predictions come from the stored evaluations: no extra calls.
  PredictionMatrix train_matrix;
  for (const auto& example : data_.eval) train_matrix.example_ids.push_back(example.id);
  train_matrix.cells.assign(data_.eval.size(), std::vector<Prediction>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    train_matrix.member_ids.push_back(members[j].id);
    const auto& record = state_.train_records.at(members[j].id);
    for (std::size_t i = 0; i < record.per_example.size(); ++i) train_matrix.cells[i][j] = record.per_example[i].parsed;
  }
  const auto train_golds = golds_of(data_.eval);

  PredictionMatrix dev_matrix;
  if (config_.data.weight_fit == WeightFitSplit::dev) {
    log_.set_phase("ensemble_fit");
    dev_matrix = build_prediction_matrix(members, data_.dev, evaluator_);
  }
  log_.set_phase("ensemble_test");
  const PredictionMatrix test_matrix = build_prediction_matrix(members, data_.test, evaluator_);
  const auto test_golds = golds_of(data_.test);
  const auto dev_golds = golds_of(data_.dev);

  FinalResults results;
  WeightFit fit;
  const std::uint64_t fit_seed = state_.rng.next();
  switch (config_.data.weight_fit) {
    case WeightFitSplit::dev:
      results.fit_split = "dev";
      fit = fit_weights(dev_matrix, dev_golds, ensemble_config, fit_seed, data_.label_space);
      break;
    case WeightFitSplit::train:
      results.fit_split = "train";
      fit = fit_weights(train_matrix, train_golds, ensemble_config, fit_seed, data_.label_space);
      break;
    case WeightFitSplit::test:
      results.fit_split = "test";
      fit = fit_weights(test_matrix, test_golds, ensemble_config, fit_seed, data_.label_space);
      break;
  }
  results.objective = fit.objective;
  results.uniform_objective = fit.uniform_objective;

  const auto train_votes = vote_rows(train_matrix, fit.weights);
  const auto test_votes = vote_rows(test_matrix, fit.weights);
  results.train_macro_f1 = macro_f1(train_votes, train_golds, data_.label_space);
  results.train_accuracy = accuracy(train_votes, train_golds);
  results.test_macro_f1 = macro_f1(test_votes, test_golds, data_.label_space);
  results.test_accuracy = accuracy(test_votes, test_golds);
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto train_column = column(train_matrix, j);
    const auto test_column = column(test_matrix, j);
    results.member_train_macro_f1.push_back(macro_f1(train_column, train_golds, data_.label_space));
    results.member_train_accuracy.push_back(accuracy(train_column, train_golds));
    results.member_test_macro_f1.push_back(macro_f1(test_column, test_golds, data_.label_space));
    results.member_test_accuracy.push_back(accuracy(test_column, test_golds));
  }

  EnsembleModel model;
  model.members = members;
  model.weights = fit.weights;
  model.config = ensemble_config;
  model.label_space = data_.label_space;
  model.metric = data_.metric;
  model.task = TaskModelSettings{config_.task.model, config_.task.temperature, config_.task.max_output};
  model.validate();

  state_.ensemble = std::move(model);
  state_.results = std::move(results);
  state_.completed = true;
  log_.set_phase("done");
  sync_bookkeeping();
}

namespace {

void write_report(const std::filesystem::path& dir, const RunConfig& config, const RunState& state, json& report) {
  report = build_report(config, state);
  write_file_atomic(dir / "report.json", report.dump(2) + "\n");
}

}  // namespace

RunOutcome run_optimize(const RunConfig& config, const RunOptions& options) {
  const std::filesystem::path dir = config.artifact_dir;
  const json snapshot = config_to_json(config);

  TaskData data = load_task_data(config);
  std::optional<json> script;
  if (!config.script.empty()) script = read_json_file(config.script);
  auto task = make_chat_client(config.task, "task", script ? &*script : nullptr);
  auto optimizer = make_chat_client(config.optimizer, "optimizer", script ? &*script : nullptr);
  auto embedder = make_embedder(config.embedding);
  TemplateSet templates = config.templates_dir.empty() ? TemplateSet::defaults() : TemplateSet::load(config.templates_dir);

  std::filesystem::create_directories(dir);
  if (options.resume) {
    const json previous = read_json_file(dir / "config.snapshot.json");
    if (previous != snapshot) {
      throw ConfigError({"<resume>: configuration differs from the snapshot in '" + dir.string() + "'"});
    }
  } else {
    for (const char* name : {"state.json", "report.json", "ensemble.json", "calls.log.jsonl", "timing.json"}) {
      std::filesystem::remove(dir / name);
    }
    write_file_atomic(dir / "config.snapshot.json", snapshot.dump(2) + "\n");
  }

  CallLog log(dir / "calls.log.jsonl");
  LoggingClient task_logged(*task, log, "task");
  LoggingClient optimizer_logged(*optimizer, log, "optimizer");
  Orchestrator orchestrator(config, std::move(data), task_logged, optimizer_logged, *embedder, log,
                            std::move(templates));

  const auto started = std::chrono::steady_clock::now();
  RunOutcome outcome;
  outcome.artifact_dir = dir;

  if (options.resume) {
    orchestrator.restore(resume(dir));
  } else {
    orchestrator.initialize();
    checkpoint(orchestrator.state(), dir);
    write_report(dir, config, orchestrator.state(), outcome.report);
  }

  std::size_t ran = 0;
  while (!orchestrator.iterations_done() && (!options.stop_after || ran < *options.stop_after)) {
    orchestrator.step();
    ++ran;
    checkpoint(orchestrator.state(), dir);
    write_report(dir, config, orchestrator.state(), outcome.report);
  }
  if (orchestrator.iterations_done() && !orchestrator.state().completed) {
    orchestrator.finish();
    checkpoint(orchestrator.state(), dir);
  }
  if (orchestrator.state().completed) save_ensemble(*orchestrator.state().ensemble, dir / "ensemble.json");
  write_report(dir, config, orchestrator.state(), outcome.report);

  if (options.write_timing) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file_atomic(dir / "timing.json",
                      json{{"wall_seconds", seconds}, {"iterations_run", ran}, {"resumed", options.resume}}.dump(2) +
                          "\n");
  }
  outcome.state = orchestrator.state();
  return outcome;
}

}  // namespace ensprompt
