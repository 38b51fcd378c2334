#include "ensprompt/ensemble/ensemble.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/serialization.hpp"
#include "ensprompt/ensemble/voting.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/numerics/kmeans.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

bool better(const PromptCandidate& a, const PromptCandidate& b) {
  if (*a.score != *b.score) return *a.score > *b.score;
  return a.id < b.id;
}

}  // namespace

void EnsembleModel::validate() const {
  if (members.empty()) throw ContractViolation("ensemble has no members");
  std::set<std::string> ids;
  for (const auto& member : members) {
    if (!ids.insert(member.id).second) {
      throw ContractViolation("ensemble member id '" + member.id + "' appears twice");
    }
  }
  if (weights.size() != members.size()) {
    throw ContractViolation("ensemble has " + std::to_string(members.size()) + " members but " +
                            std::to_string(weights.size()) + " weights");
  }
  if (!is_feasible(weights, config.min_weight)) {
    throw ContractViolation("ensemble weights are not on the floored simplex");
  }
}

std::vector<PromptCandidate> select_members(std::span<const PromptCandidate> population, std::size_t m,
                                            std::uint64_t seed) {
  if (population.empty()) throw ContractViolation("select_members: empty population");
  if (m < 1) throw ContractViolation("select_members: M must be >= 1");
  for (const auto& candidate : population) {
    if (!candidate.score || !candidate.embedding) {
      throw ContractViolation("select_members: candidate '" + candidate.id +
                              "' must be scored and embedded");
    }
  }

  std::vector<PromptCandidate> chosen;
  if (population.size() <= m) {
    chosen.assign(population.begin(), population.end());
  } else {
    std::vector<Vector> embeddings;
    for (const auto& candidate : population) embeddings.push_back(*candidate.embedding);
    const Clustering clustering = kmeans(embeddings, m, seed);
    std::vector<const PromptCandidate*> best(clustering.k(), nullptr);
    for (std::size_t i = 0; i < population.size(); ++i) {
      auto& slot = best[clustering.assignments[i]];
      if (slot == nullptr || better(population[i], *slot)) slot = &population[i];
    }
    std::set<std::string> taken;
    for (const auto* pick : best) {
      if (pick != nullptr && taken.insert(pick->id).second) chosen.push_back(*pick);
    }
    if (chosen.size() < m) {
      std::vector<PromptCandidate> rest;
      for (const auto& candidate : population) {
        if (!taken.contains(candidate.id)) rest.push_back(candidate);
      }
      std::sort(rest.begin(), rest.end(), better);
      for (std::size_t i = 0; i < rest.size() && chosen.size() < m; ++i) chosen.push_back(rest[i]);
    }
  }
  std::sort(chosen.begin(), chosen.end(), better);
  return chosen;
}

PredictionMatrix build_prediction_matrix(std::span<const PromptCandidate> members,
                                         std::span<const Example> examples, TaskEvaluator& evaluator) {
  PredictionMatrix matrix;
  for (const auto& example : examples) matrix.example_ids.push_back(example.id);
  for (const auto& member : members) matrix.member_ids.push_back(member.id);
  matrix.cells.assign(examples.size(), std::vector<Prediction>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto outputs = evaluator.raw_outputs(members[j].text, examples);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      matrix.cells[i][j] = parse_label(outputs[i], evaluator.label_space());
    }
  }
  return matrix;
}

Prediction predict(const EnsembleModel& model, const std::string& query, ChatClient& task_client) {
  model.validate();
  auto ask = [&](const PromptCandidate& member) {
    ChatRequest request;
    request.system_text = member.text;
    request.user_text = query;
    request.temperature = model.task.temperature;
    request.max_output = model.task.max_output;
    request.model_id = model.task.model_id;
    return parse_label(task_client.complete(request), model.label_space);
  };
  std::vector<Prediction> votes(model.members.size());
  if (task_client.max_in_flight() <= 1) {
    for (std::size_t j = 0; j < model.members.size(); ++j) votes[j] = ask(model.members[j]);
  } else {
    const std::size_t width = task_client.max_in_flight();
    for (std::size_t begin = 0; begin < model.members.size(); begin += width) {
      const std::size_t end = std::min(model.members.size(), begin + width);
      std::vector<std::future<Prediction>> wave;
      for (std::size_t j = begin; j < end; ++j) {
        wave.push_back(std::async(std::launch::async, ask, std::cref(model.members[j])));
      }
      for (std::size_t j = begin; j < end; ++j) votes[j] = wave[j - begin].get();
    }
  }
  return weighted_vote(votes, model.weights);
}

json ensemble_to_json(const EnsembleModel& model) {
  json members = json::array();
  for (const auto& member : model.members) {
    members.push_back({{"id", member.id},
                       {"text", member.text},
                       {"origin", to_string(member.origin)},
                       {"score", member.score ? json(*member.score) : json(nullptr)}});
  }
  return json{
      {"format_version", kEnsembleFormatVersion},
      {"members", std::move(members)},
      {"weights", model.weights},
      {"tie_break", kTieBreakRule},
      {"config",
       {{"M", model.config.members},
        {"lambda", model.config.lambda},
        {"w_min", model.config.min_weight},
        {"random_starts", model.config.random_starts}}},
      {"task",
       {{"label_space", model.label_space.labels()},
        {"metric", to_string(model.metric)},
        {"model_id", model.task.model_id},
        {"temperature", model.task.temperature},
        {"max_output", model.task.max_output}}},
  };
}

EnsembleModel ensemble_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kEnsembleFormatVersion) {
      throw LoadError("ensemble format version mismatch: expected " +
                      std::to_string(kEnsembleFormatVersion) + ", found " + std::to_string(version));
    }
    if (doc.at("tie_break").get<std::string>() != kTieBreakRule) {
      throw LoadError("unsupported ensemble tie-break rule '" +
                      doc.at("tie_break").get<std::string>() + "'");
    }
    EnsembleModel model;
    for (const auto& item : doc.at("members")) {
      PromptCandidate member;
      member.id = item.at("id").get<std::string>();
      member.text = item.at("text").get<std::string>();
      member.origin = origin_from_string(item.at("origin").get<std::string>());
      if (item.contains("score") && !item["score"].is_null()) member.score = item["score"].get<double>();
      model.members.push_back(std::move(member));
    }
    model.weights = doc.at("weights").get<std::vector<double>>();
    const json& config = doc.at("config");
    model.config.members = config.at("M").get<std::size_t>();
    model.config.lambda = config.at("lambda").get<double>();
    model.config.min_weight = config.at("w_min").get<double>();
    model.config.random_starts = config.value("random_starts", model.config.random_starts);
    const json& task = doc.at("task");
    model.label_space = LabelSpace(task.at("label_space").get<std::vector<std::string>>());
    model.metric = metric_from_string(task.at("metric").get<std::string>());
    model.task.model_id = task.value("model_id", model.task.model_id);
    model.task.temperature = task.value("temperature", model.task.temperature);
    model.task.max_output = task.value("max_output", model.task.max_output);
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed ensemble artifact: ") + e.what());
  } catch (const ContractViolation& e) {
    throw LoadError(std::string("invalid ensemble artifact: ") + e.what());
  }
}

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write ensemble artifact '" + path.string() + "'");
  out << ensemble_to_json(model).dump(2) << '\n';
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open ensemble artifact '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw LoadError("ensemble artifact '" + path.string() + "' is not valid JSON");
  return ensemble_from_json(doc);
}

}  // namespace ensprompt
