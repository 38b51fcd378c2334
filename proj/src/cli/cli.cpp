#include "ensprompt/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "ensprompt/core/dataset.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/core/serialization.hpp"
#include "ensprompt/ensemble/ensemble.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/orchestrator/config.hpp"
#include "ensprompt/orchestrator/report.hpp"
#include "ensprompt/orchestrator/run.hpp"

namespace ensprompt {

using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string config;
  std::optional<long long> seed;
  std::vector<std::string> overrides;
  std::string scripted;
};

void add_config_flags(CLI::App& command, ConfigFlags& flags, bool config_required) {
  auto* option = command.add_option("--config", flags.config, "run configuration (JSON)");
  if (config_required) option->required();
  command.add_option("--seed", flags.seed, "override the run seed");
  command.add_option("--set", flags.overrides, "override a config key: dotted.key=value (repeatable)");
  command.add_option("--scripted", flags.scripted, "script file; forces offline scripted models");
}

std::string absolute_string(const std::string& path) {
  return std::filesystem::absolute(path).lexically_normal().string();
}

// Config document with CLI overrides applied, plus the directory relative
// paths resolve against.
std::pair<json, std::filesystem::path> assemble(const ConfigFlags& flags) {
  json doc = read_json_file(flags.config);
  if (!doc.is_object()) throw ConfigError({"<root>: configuration must be a JSON object"});
  for (const auto& assignment : flags.overrides) apply_override(doc, assignment);
  if (flags.seed) doc["seed"] = *flags.seed;
  if (!flags.scripted.empty()) {
    doc["script"] = absolute_string(flags.scripted);
    for (const char* role : {"task", "optimizer"}) doc["models"][role]["provider"] = "scripted";
    doc["models"]["embedding"]["provider"] = "hashing";
  }
  return {std::move(doc), std::filesystem::absolute(flags.config).parent_path()};
}

void print_problems(std::ostream& err, const ConfigError& e) {
  err << "configuration error:\n";
  for (const auto& problem : e.problems()) err << "  - " << problem << "\n";
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    print_problems(err, e);
    return kExitConfig;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ScriptExhausted& e) {
    err << "script exhausted: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_optimize(const ConfigFlags& flags, const std::string& out_dir, bool resume,
                 std::optional<std::size_t> stop_after, std::ostream& out) {
  auto [doc, base] = assemble(flags);
  if (!out_dir.empty()) doc["artifact_dir"] = absolute_string(out_dir);
  const RunConfig config = config_from_json(doc, base);
  RunOptions options;
  options.resume = resume;
  options.stop_after = stop_after;
  const RunOutcome outcome = run_optimize(config, options);
  const json& report = outcome.report;
  out << "artifacts: " << outcome.artifact_dir.string() << "\n";
  out << "iterations: " << report["iterations_completed"].get<std::size_t>() << "/"
      << report["iterations_planned"].get<std::size_t>() << "\n";
  if (!report["best"].is_null()) {
    out << "best: " << report["best"]["id"].get<std::string>() << " " << report["best"]["score"].get<double>() << "\n";
  }
  if (!report["ensemble"].is_null()) {
    out << "ensemble test macro_f1: " << report["ensemble"]["test_macro_f1"].get<double>() << "\n";
    out << "ensemble test accuracy: " << report["ensemble"]["test_accuracy"].get<double>() << "\n";
  } else {
    out << "run incomplete\n";
  }
  return kExitOk;
}

int cmd_validate(const ConfigFlags& flags, std::ostream& out, std::ostream& err) {
  auto [doc, base] = assemble(flags);
  (void)base;
  const auto problems = validate_config(doc);
  if (problems.empty()) {
    out << "ok\n";
    return kExitOk;
  }
  print_problems(err, ConfigError(problems));
  return kExitConfig;
}

int cmd_eval(const ConfigFlags& flags, const std::string& ensemble_path, const std::string& data_path,
             const std::string& report_path, std::ostream& out) {
  std::filesystem::path artifact = ensemble_path;
  if (std::filesystem::is_directory(artifact)) artifact /= "ensemble.json";
  const EnsembleModel model = load_ensemble(artifact);

  Dataset dataset{load_jsonl(data_path), model.label_space, model.metric};
  try {
    dataset.validate();
  } catch (const ContractViolation& e) {
    throw LoadError("'" + data_path + "': " + e.what());
  }

  std::unique_ptr<ChatClient> client;
  if (!flags.scripted.empty()) {
    const json script = read_json_file(flags.scripted);
    ModelConfig scripted;
    client = make_chat_client(scripted, "task", &script);
  } else if (!flags.config.empty()) {
    auto [doc, base] = assemble(flags);
    const RunConfig config = config_from_json(doc, base);
    std::optional<json> script;
    if (!config.script.empty()) script = read_json_file(config.script);
    client = make_chat_client(config.task, "task", script ? &*script : nullptr);
  } else {
    throw ConfigError({"eval: a task model is needed (--scripted PATH or --config PATH)"});
  }

  std::vector<Prediction> predictions;
  json rows = json::array();
  for (const auto& example : dataset.examples) {
    predictions.push_back(predict(model, example.input, *client));
    rows.push_back({{"id", example.id},
                    {"prediction", prediction_to_json(predictions.back())},
                    {"expected", example.expected}});
  }
  const auto golds = dataset.golds();
  const double f1 = macro_f1(predictions, golds, model.label_space);
  const double acc = accuracy(predictions, golds);

  const json report{{"ensemble", artifact.string()},
                    {"dataset", data_path},
                    {"examples", dataset.examples.size()},
                    {"macro_f1", f1},
                    {"accuracy", acc},
                    {"predictions", std::move(rows)}};
  const std::filesystem::path target =
      report_path.empty() ? artifact.parent_path() / "eval.json" : std::filesystem::path(report_path);
  write_file_atomic(target, report.dump(2) + "\n");

  out << "examples: " << dataset.examples.size() << "\n";
  out << "macro_f1: " << f1 << "\n";
  out << "accuracy: " << acc << "\n";
  out << "report: " << target.string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& dir, std::ostream& out) {
  const std::filesystem::path path = std::filesystem::path(dir) / "report.json";
  if (!std::filesystem::exists(path)) throw LoadError("no report.json in '" + dir + "'");
  out << render_report(read_json_file(path));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble prompt optimizer"};
  app.require_subcommand(1);

  ConfigFlags optimize_flags;
  std::string out_dir;
  bool resume = false;
  std::optional<std::size_t> stop_after;
  auto* optimize = app.add_subcommand("optimize", "run the optimization loop");
  add_config_flags(*optimize, optimize_flags, true);
  optimize->add_option("--out", out_dir, "artifact directory (overrides artifact_dir)");
  optimize->add_flag("--resume", resume, "continue from state.json in the artifact directory");
  optimize->add_option("--stop-after", stop_after, "run at most N iterations in this invocation");

  ConfigFlags eval_flags;
  std::string ensemble_path, data_path, eval_report;
  auto* eval = app.add_subcommand("eval", "score a saved ensemble on a dataset");
  add_config_flags(*eval, eval_flags, false);
  eval->add_option("--ensemble", ensemble_path, "ensemble.json or an artifact directory")->required();
  eval->add_option("--data", data_path, "JSONL dataset")->required();
  eval->add_option("--out", eval_report, "where to write the evaluation report");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "print a run summary");
  report->add_option("dir", report_dir, "artifact directory")->required();

  ConfigFlags validate_flags;
  auto* validate = app.add_subcommand("validate-config", "check a configuration file");
  add_config_flags(*validate, validate_flags, true);

  std::vector<std::string> argv_storage{"ensprompt"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& arg : argv_storage) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (optimize->parsed()) {
    return guarded(err, [&] { return cmd_optimize(optimize_flags, out_dir, resume, stop_after, out); });
  }
  if (eval->parsed()) {
    return guarded(err, [&] { return cmd_eval(eval_flags, ensemble_path, data_path, eval_report, out); });
  }
  if (report->parsed()) return guarded(err, [&] { return cmd_report(report_dir, out); });
  return guarded(err, [&] { return cmd_validate(validate_flags, out, err); });
}

}  // namespace ensprompt
