#include "ensprompt/orchestrator/state.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ensprompt/core/serialization.hpp"
#include "ensprompt/errors.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

json summary_to_json(const IterationSummary& s) {
  return json{{"iteration", s.iteration},
              {"best_score", s.best_score},
              {"best_id", s.best_id},
              {"population", s.population},
              {"pool_size", s.pool_size},
              {"evaluated_total", s.evaluated_total},
              {"generated", s.generated},
              {"bayes_picks", s.bayes_picks},
              {"mab_picks", s.mab_picks},
              {"newly_evaluated", s.newly_evaluated}};
}

IterationSummary summary_from_json(const json& in) {
  IterationSummary s;
  s.iteration = in.at("iteration").get<std::size_t>();
  s.best_score = in.at("best_score").get<double>();
  s.best_id = in.at("best_id").get<std::string>();
  s.population = in.at("population").get<std::vector<std::string>>();
  s.pool_size = in.at("pool_size").get<std::size_t>();
  s.evaluated_total = in.at("evaluated_total").get<std::size_t>();
  s.generated = in.at("generated").get<std::map<std::string, std::size_t>>();
  s.bayes_picks = in.at("bayes_picks").get<std::vector<std::string>>();
  s.mab_picks = in.at("mab_picks").get<std::vector<std::string>>();
  s.newly_evaluated = in.at("newly_evaluated").get<std::vector<std::string>>();
  return s;
}

json results_to_json(const FinalResults& r) {
  return json{{"fit_split", r.fit_split},
              {"objective", r.objective},
              {"uniform_objective", r.uniform_objective},
              {"train_macro_f1", r.train_macro_f1},
              {"train_accuracy", r.train_accuracy},
              {"test_macro_f1", r.test_macro_f1},
              {"test_accuracy", r.test_accuracy},
              {"member_train_macro_f1", r.member_train_macro_f1},
              {"member_train_accuracy", r.member_train_accuracy},
              {"member_test_macro_f1", r.member_test_macro_f1},
              {"member_test_accuracy", r.member_test_accuracy}};
}

FinalResults results_from_json(const json& in) {
  FinalResults r;
  r.fit_split = in.at("fit_split").get<std::string>();
  r.objective = in.at("objective").get<double>();
  r.uniform_objective = in.at("uniform_objective").get<double>();
  r.train_macro_f1 = in.at("train_macro_f1").get<double>();
  r.train_accuracy = in.at("train_accuracy").get<double>();
  r.test_macro_f1 = in.at("test_macro_f1").get<double>();
  r.test_accuracy = in.at("test_accuracy").get<double>();
  r.member_train_macro_f1 = in.at("member_train_macro_f1").get<std::vector<double>>();
  r.member_train_accuracy = in.at("member_train_accuracy").get<std::vector<double>>();
  r.member_test_macro_f1 = in.at("member_test_macro_f1").get<std::vector<double>>();
  r.member_test_accuracy = in.at("member_test_accuracy").get<std::vector<double>>();
  return r;
}

}  // namespace

double RunState::best_score() const {
  double best = 0.0;
  for (const auto& entry : history) best = std::max(best, entry.score);
  return best;
}

std::vector<PromptCandidate> RunState::population_candidates() const {
  std::vector<PromptCandidate> out;
  out.reserve(population.size());
  for (const auto& id : population) out.push_back(pool.at(id));
  return out;
}

json state_to_json(const RunState& state) {
  json records = json::object();
  for (const auto& [id, record] : state.train_records) records[id] = record;
  json history = json::array();
  for (const auto& entry : state.history) history.push_back({{"prompt_id", entry.prompt_id}, {"score", entry.score}});
  json trajectory = json::array();
  for (const auto& summary : state.trajectory) trajectory.push_back(summary_to_json(summary));

  return json{{"format_version", kStateFormatVersion},
              {"iteration", state.iteration},
              {"completed", state.completed},
              {"pool", state.pool.candidates()},
              {"population", state.population},
              {"tracker", state.tracker.to_json()},
              {"history", std::move(history)},
              {"rng", state.rng.serialize()},
              {"next_id", state.next_id},
              {"train_records", std::move(records)},
              {"trajectory", std::move(trajectory)},
              {"client_state", state.client_state},
              {"call_counts", state.call_counts},
              {"ensemble", state.ensemble ? ensemble_to_json(*state.ensemble) : json(nullptr)},
              {"results", state.results ? results_to_json(*state.results) : json(nullptr)},
              {"splits",
               {{"train", state.splits.train},
                {"eval", state.splits.eval},
                {"dev", state.splits.dev},
                {"test", state.splits.test}}}};
}

RunState state_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw LoadError("state: missing format_version");
  }
  const json& version = doc["format_version"];
  if (!version.is_number_integer() || version.get<long long>() != kStateFormatVersion) {
    throw LoadError("state format version mismatch: expected " + std::to_string(kStateFormatVersion) +
                    ", found " + version.dump());
  }
  try {
    RunState state;
    state.iteration = doc.at("iteration").get<std::size_t>();
    state.completed = doc.at("completed").get<bool>();
    for (const auto& item : doc.at("pool")) {
      if (!state.pool.insert(item.get<PromptCandidate>())) {
        throw LoadError("state: duplicate pool entry '" + item.at("id").get<std::string>() + "'");
      }
    }
    state.population = doc.at("population").get<std::vector<std::string>>();
    for (const auto& id : state.population) {
      if (!state.pool.contains_id(id)) throw LoadError("state: population member '" + id + "' not in pool");
    }
    state.tracker = BadCaseTracker::from_json(doc.at("tracker"));
    for (const auto& item : doc.at("history")) {
      state.history.push_back({item.at("prompt_id").get<std::string>(), item.at("score").get<double>()});
    }
    state.rng = Rng::deserialize(doc.at("rng").get<std::string>());
    state.next_id = doc.at("next_id").get<std::size_t>();
    for (const auto& [id, record] : doc.at("train_records").items()) {
      state.train_records.emplace(id, record.get<EvaluationRecord>());
    }
    for (const auto& item : doc.at("trajectory")) state.trajectory.push_back(summary_from_json(item));
    state.client_state = doc.at("client_state");
    state.call_counts = doc.at("call_counts");
    if (!doc.at("ensemble").is_null()) state.ensemble = ensemble_from_json(doc["ensemble"]);
    if (!doc.at("results").is_null()) state.results = results_from_json(doc["results"]);
    const json& splits = doc.at("splits");
    state.splits = {splits.at("train").get<std::size_t>(), splits.at("eval").get<std::size_t>(),
                    splits.at("dev").get<std::size_t>(), splits.at("test").get<std::size_t>()};
    return state;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(std::string("state: malformed document (") + e.what() + ")");
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + temp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + temp.string() + "'");
  }
  std::filesystem::rename(temp, path);
}

void checkpoint(const RunState& state, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "state.json", state_to_json(state).dump(1) + "\n");
}

RunState resume(const std::filesystem::path& dir) {
  const auto path = dir / "state.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open run state '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw LoadError("run state '" + path.string() + "' is not valid JSON");
  return state_from_json(doc);
}

}  // namespace ensprompt
