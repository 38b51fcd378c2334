#include "ensprompt/orchestrator/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ensprompt {

using nlohmann::json;

namespace {

constexpr const char* kPhases[] = {"seed_eval", "generate", "search", "evaluate", "ensemble_fit", "ensemble_test"};

std::size_t counted(const json& call_counts, const std::string& role, const std::string& phase) {
  if (!call_counts.is_object() || !call_counts.contains("counts")) return 0;
  for (const auto& item : call_counts["counts"]) {
    if (item.value("role", "") == role && item.value("phase", "") == phase) return item.value("calls", std::size_t{0});
  }
  return 0;
}

json role_calls(const json& call_counts, const std::string& role) {
  json out = json::object();
  std::size_t total = 0;
  for (const char* phase : kPhases) {
    const auto n = counted(call_counts, role, phase);
    out[phase] = n;
    total += n;
  }
  out["total"] = total;
  return out;
}

std::string fixed(double value, int digits = 4) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

std::string pad(std::string text, std::size_t width, bool right = false) {
  if (text.size() >= width) return text;
  const std::string fill(width - text.size(), ' ');
  return right ? fill + text : text + fill;
}

}  // namespace

json build_report(const RunConfig& config, const RunState& state) {
  json report;
  report["format_version"] = kReportFormatVersion;
  report["completed"] = state.completed;
  report["seed"] = config.seed;
  report["metric"] = to_string(config.data.metric);
  report["iterations_planned"] = config.iterations;
  report["iterations_completed"] = state.iteration;
  report["splits"] = {{"train", state.splits.train},
                      {"eval", state.splits.eval},
                      {"dev", state.splits.dev},
                      {"test", state.splits.test}};

  const PromptCandidate* seed_best = nullptr;
  const PromptCandidate* best = nullptr;
  for (const auto& candidate : state.pool.candidates()) {
    if (!candidate.score) continue;
    auto beats = [&](const PromptCandidate* other) {
      return other == nullptr || *candidate.score > *other->score ||
             (*candidate.score == *other->score && candidate.id < other->id);
    };
    if (beats(best)) best = &candidate;
    if (candidate.origin == Origin::seed && beats(seed_best)) seed_best = &candidate;
  }
  report["initial_best"] =
      seed_best ? json{{"id", seed_best->id}, {"score", *seed_best->score}} : json(nullptr);

  json trajectory = json::array();
  for (const auto& s : state.trajectory) {
    trajectory.push_back({{"iteration", s.iteration},
                          {"best_score", s.best_score},
                          {"best_id", s.best_id},
                          {"population", s.population},
                          {"pool_size", s.pool_size},
                          {"evaluated_total", s.evaluated_total},
                          {"generated", s.generated},
                          {"bayes_picks", s.bayes_picks},
                          {"mab_picks", s.mab_picks},
                          {"newly_evaluated", s.newly_evaluated}});
  }
  report["trajectory"] = std::move(trajectory);
  report["best"] = best ? json{{"id", best->id},
                               {"origin", to_string(best->origin)},
                               {"score", *best->score},
                               {"text", best->text}}
                        : json(nullptr);

  if (state.completed && state.ensemble && state.results) {
    const auto& model = *state.ensemble;
    const auto& r = *state.results;
    json members = json::array();
    for (std::size_t j = 0; j < model.members.size(); ++j) {
      members.push_back({{"id", model.members[j].id},
                         {"origin", to_string(model.members[j].origin)},
                         {"weight", model.weights[j]},
                         {"train_macro_f1", r.member_train_macro_f1[j]},
                         {"train_accuracy", r.member_train_accuracy[j]},
                         {"test_macro_f1", r.member_test_macro_f1[j]},
                         {"test_accuracy", r.member_test_accuracy[j]}});
    }
    report["ensemble"] = {{"fit_split", r.fit_split},
                          {"objective", r.objective},
                          {"uniform_objective", r.uniform_objective},
                          {"members", std::move(members)},
                          {"train_macro_f1", r.train_macro_f1},
                          {"train_accuracy", r.train_accuracy},
                          {"test_macro_f1", r.test_macro_f1},
                          {"test_accuracy", r.test_accuracy}};
  } else {
    report["ensemble"] = nullptr;
  }

  // Accounting identity: searched evaluations are bounded by the per-iteration
  // budget, ensemble calls by M times the split sizes.
  const json task = role_calls(state.call_counts, "task");
  const std::size_t m = state.ensemble ? state.ensemble->members.size() : config.ensemble.members;
  const std::size_t search_calls = task["search"].get<std::size_t>() + task["evaluate"].get<std::size_t>();
  const std::size_t search_bound = config.evaluation_budget() * config.iterations * state.splits.eval;
  const std::size_t fit_bound = config.data.weight_fit == WeightFitSplit::dev ? m * state.splits.dev : 0;
  const std::size_t test_bound = m * state.splits.test;
  report["calls"] = {
      {"task", task},
      {"optimizer", role_calls(state.call_counts, "optimizer")},
      {"accounting",
       {{"search_and_evaluate", search_calls},
        {"search_bound", search_bound},
        {"ensemble_fit", task["ensemble_fit"]},
        {"ensemble_fit_bound", fit_bound},
        {"ensemble_test", task["ensemble_test"]},
        {"ensemble_test_bound", test_bound},
        {"holds", search_calls <= search_bound && task["ensemble_fit"].get<std::size_t>() <= fit_bound &&
                      task["ensemble_test"].get<std::size_t>() <= test_bound}}}};
  return report;
}

std::string render_report(const json& report) {
  std::ostringstream out;
  const bool completed = report.value("completed", false);
  const auto planned = report.value("iterations_planned", std::size_t{0});
  const auto done = report.value("iterations_completed", std::size_t{0});

  out << "status: " << (completed ? "complete" : "incomplete") << " (" << done << "/" << planned
      << " iterations)\n";
  out << "metric: " << report.value("metric", "") << "\n";
  out << "seed: " << report.value("seed", std::uint64_t{0}) << "\n";
  if (report.contains("initial_best") && !report["initial_best"].is_null()) {
    out << "seed best: " << fixed(report["initial_best"]["score"].get<double>()) << " ("
        << report["initial_best"]["id"].get<std::string>() << ")\n";
  }
  out << "\n";

  out << pad("iter", 6) << pad("best", 8) << "  " << pad("best_id", 9) << pad("pool", 6, true)
      << pad("evaluated", 11, true) << pad("new", 5, true) << "\n";
  for (const auto& row : report.value("trajectory", json::array())) {
    std::size_t generated = 0;
    for (const auto& [origin, count] : row["generated"].items()) generated += count.get<std::size_t>();
    out << pad(std::to_string(row["iteration"].get<std::size_t>()), 6) << pad(fixed(row["best_score"].get<double>()), 8)
        << "  " << pad(row["best_id"].get<std::string>(), 9)
        << pad(std::to_string(row["pool_size"].get<std::size_t>()), 6, true)
        << pad(std::to_string(row["evaluated_total"].get<std::size_t>()), 11, true)
        << pad(std::to_string(generated), 5, true) << "\n";
  }
  out << "\n";

  const json& ensemble = report.contains("ensemble") ? report["ensemble"] : json();
  if (!completed || ensemble.is_null()) {
    out << "ensemble: not built (run incomplete)\n";
    return out.str();
  }
  out << "ensemble (weights fitted on " << ensemble["fit_split"].get<std::string>() << "):\n";
  out << pad("member", 10) << pad("origin", 25) << pad("weight", 8, true) << pad("train_f1", 10, true)
      << pad("test_f1", 10, true) << pad("test_acc", 10, true) << "\n";
  for (const auto& member : ensemble["members"]) {
    out << pad(member["id"].get<std::string>(), 10) << pad(member["origin"].get<std::string>(), 25)
        << pad(fixed(member["weight"].get<double>()), 8, true)
        << pad(fixed(member["train_macro_f1"].get<double>()), 10, true)
        << pad(fixed(member["test_macro_f1"].get<double>()), 10, true)
        << pad(fixed(member["test_accuracy"].get<double>()), 10, true) << "\n";
  }
  out << pad("ENSEMBLE", 10) << pad("", 25) << pad("", 8, true)
      << pad(fixed(ensemble["train_macro_f1"].get<double>()), 10, true)
      << pad(fixed(ensemble["test_macro_f1"].get<double>()), 10, true)
      << pad(fixed(ensemble["test_accuracy"].get<double>()), 10, true) << "\n";

  if (report.contains("calls")) {
    const json& calls = report["calls"];
    out << "\ncalls: task " << calls["task"]["total"].get<std::size_t>() << ", optimizer "
        << calls["optimizer"]["total"].get<std::size_t>() << "\n";
  }
  return out.str();
}

}  // namespace ensprompt
