// Python bindings for the ensprompt core: label handling, metrics, voting,
// weight fitting, EI, GPR, the hashing embedder and the CLI entry point.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ensprompt/cli/cli.hpp"
#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/ensemble/voting.hpp"
#include "ensprompt/ensemble/weights.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/llm/embedder.hpp"
#include "ensprompt/numerics/gpr.hpp"
#include "ensprompt/search/acquisition.hpp"

namespace py = pybind11;
using namespace ensprompt;

namespace {

LabelSpace space_of(const std::optional<std::vector<std::string>>& labels) {
  return labels ? LabelSpace(*labels) : LabelSpace{};
}

PredictionMatrix matrix_of(const std::vector<std::vector<Prediction>>& rows) {
  PredictionMatrix matrix;
  matrix.cells = rows;
  for (std::size_t i = 0; i < rows.size(); ++i) matrix.example_ids.push_back("e" + std::to_string(i));
  const std::size_t members = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < members; ++j) matrix.member_ids.push_back("m" + std::to_string(j));
  return matrix;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the ensprompt prompt-ensemble optimizer";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("normalize_label", [](const std::string& text) { return normalize_label(text); }, py::arg("text"));
  m.def(
      "parse_label",
      [](const std::string& raw, const std::optional<std::vector<std::string>>& labels) {
        return parse_label(raw, space_of(labels));
      },
      py::arg("raw"), py::arg("labels") = py::none(),
      "Label extracted from a raw model output, or None when INVALID.");

  m.def(
      "macro_f1",
      [](const std::vector<Prediction>& predictions, const std::vector<Label>& golds,
         const std::optional<std::vector<std::string>>& labels) {
        return macro_f1(predictions, golds, space_of(labels));
      },
      py::arg("predictions"), py::arg("golds"), py::arg("labels") = py::none());
  m.def(
      "accuracy",
      [](const std::vector<Prediction>& predictions, const std::vector<Label>& golds) {
        return accuracy(predictions, golds);
      },
      py::arg("predictions"), py::arg("golds"));

  m.def(
      "weighted_vote",
      [](const std::vector<Prediction>& predictions, const std::vector<double>& weights) {
        return weighted_vote(predictions, weights);
      },
      py::arg("predictions"), py::arg("weights"));
  m.def(
      "fit_weights",
      [](const std::vector<std::vector<Prediction>>& rows, const std::vector<Label>& golds, double lambda,
         double min_weight, std::size_t random_starts, std::uint64_t seed) {
        EnsembleConfig config;
        config.members = rows.empty() ? 1 : rows.front().size();
        config.lambda = lambda;
        config.min_weight = min_weight;
        config.random_starts = random_starts;
        const WeightFit fit = fit_weights(matrix_of(rows), golds, config, seed);
        py::dict out;
        out["weights"] = fit.weights;
        out["objective"] = fit.objective;
        out["uniform_objective"] = fit.uniform_objective;
        out["macro_f1"] = fit.macro_f1;
        return out;
      },
      py::arg("rows"), py::arg("golds"), py::arg("lam") = 1e-3, py::arg("min_weight") = 0.05,
      py::arg("random_starts") = 8, py::arg("seed") = 0,
      "Fit vote weights on a rows x members prediction matrix.");

  m.def("expected_improvement", &expected_improvement, py::arg("mean"), py::arg("sigma"), py::arg("f_star"),
        py::arg("xi") = 0.01);

  m.def(
      "gpr_predict",
      [](const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
         const std::vector<std::vector<double>>& queries, std::optional<double> lengthscale,
         std::optional<double> signal_variance, double noise) {
        if (xs.size() != ys.size()) throw ContractViolation("gpr_predict: xs and ys differ in length");
        std::vector<GprPoint> points;
        for (std::size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], ys[i]});
        RbfKernel kernel = default_kernel(points);
        if (lengthscale) kernel.lengthscale = *lengthscale;
        if (signal_variance) kernel.signal_variance = *signal_variance;
        const GprModel model = gpr_fit(points, kernel, noise);
        std::vector<std::pair<double, double>> out;
        for (const auto& q : queries) {
          const Posterior p = gpr_predict(model, q);
          out.emplace_back(p.mean, p.variance);
        }
        return out;
      },
      py::arg("xs"), py::arg("ys"), py::arg("queries"), py::arg("lengthscale") = py::none(),
      py::arg("signal_variance") = py::none(), py::arg("noise") = kGprDefaultNoise,
      "Posterior (mean, variance) pairs; unset hyperparameters use the default heuristics.");

  m.def(
      "hashing_embed",
      [](const std::string& text, std::size_t dimension, std::size_t ngram) {
        HashingEmbedder embedder(dimension, ngram);
        return embedder.embed(text);
      },
      py::arg("text"), py::arg("dimension") = 256, py::arg("ngram") = 3);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
