// Acceptance gate: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the numbers given on the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/ensemble/voting.hpp"
#include "ensprompt/ensemble/weights.hpp"
#include "ensprompt/llm/embedder.hpp"
#include "ensprompt/numerics/gpr.hpp"
#include "ensprompt/orchestrator/run.hpp"
#include "ensprompt/search/acquisition.hpp"
#include "ensprompt/search/bandit.hpp"
#include "ensprompt/search/bayes.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ensprompt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

// 1. Closed-form EI against a 1e6-sample stratified Monte-Carlo estimate.
Outcome criterion_ei() {
  double worst = 0.0;
  std::uint64_t seed = 1;
  for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double sigma : {0.05, 0.2, 1.0}) {
      for (double f_star : {0.0, 0.5}) {
        for (double xi : {0.0, 0.01}) {
          const double mc = oracle::ei_stratified(mu, sigma, f_star, xi, 1000000, seed++);
          worst = std::max(worst, std::abs(expected_improvement(mu, sigma, f_star, xi) - mc));
        }
      }
    }
  }
  return {worst <= 1e-3, "max |EI - MC| = " + fmt("%.2e", worst) + " over 60 grid points (tol 1e-3)"};
}

// 2. GPR interpolation, the 2x2 oracle and variance bounds.
Outcome criterion_gpr() {
  std::mt19937_64 engine(2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<GprPoint> points;
  for (int i = 0; i < 20; ++i) points.push_back({{unit(engine), unit(engine), unit(engine), unit(engine)}, unit(engine)});
  const RbfKernel kernel = default_kernel(points);
  const GprModel model = gpr_fit(points, kernel, 1e-9);
  double interp = 0.0;
  for (const auto& p : points) interp = std::max(interp, std::abs(gpr_predict(model, p.x).mean - p.y));

  const std::vector<GprPoint> two{{{0.0}, 0.0}, {{1.0}, 1.0}};
  const GprModel small = gpr_fit(two, RbfKernel{1.0, 1.0}, 1e-6);
  double oracle_err = 0.0;
  for (double xs : {0.5, 0.25, -0.3, 1.7}) {
    const auto p = gpr_predict(small, std::vector<double>{xs});
    const auto o = oracle::gp_two_points(0, 0, 1, 1, 1.0, 1.0, 1e-6 + small.jitter(), xs);
    oracle_err = std::max({oracle_err, std::abs(p.mean - o.mean), std::abs(p.variance - o.variance)});
  }

  std::size_t out_of_range = 0;
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  for (int q = 0; q < 1000; ++q) {
    const auto p = gpr_predict(model, std::vector<double>{wide(engine), wide(engine), wide(engine), wide(engine)});
    if (p.variance < 0.0 || p.variance > kernel.signal_variance + 1e-9) ++out_of_range;
  }
  const bool pass = interp <= 1e-5 && oracle_err <= 1e-9 && out_of_range == 0;
  return {pass, "interpolation err " + fmt("%.2e", interp) + ", 2x2 oracle err " + fmt("%.2e", oracle_err) +
                    ", variance out of range " + std::to_string(out_of_range) + "/1000"};
}

// 3. Five-arm Bernoulli bandit over five separated embedding clusters.
Outcome criterion_bandit() {
  const std::vector<double> p{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<PromptCandidate> candidates;
  std::map<std::string, std::size_t> arm_of;
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (int i = 0; i < 10; ++i) {
      PromptCandidate c;
      c.id = "a" + std::to_string(a) + "_" + std::to_string(i);
      c.text = c.id;
      std::vector<double> x(5, 0.0);
      x[a] = 100.0;
      x[(a + 1) % 5] = 0.01 * i;
      c.embedding = x;
      arm_of[c.id] = a;
      candidates.push_back(std::move(c));
    }
  }
  int wins = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    std::mt19937_64 engine(1000 + run);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BanditConfig config;
    config.clusters = 5;
    config.steps = 1000;
    config.top_arms = 1;
    config.exploration = std::sqrt(2.0);
    config.seed = run;
    const auto result = mab_select(candidates, config, [&](const PromptCandidate& c) {
      return unit(engine) < p[arm_of.at(c.id)] ? 1.0 : 0.0;
    });
    std::vector<std::size_t> pulls(p.size(), 0);
    for (std::size_t k = 0; k < result.state.arms.size(); ++k) pulls[arm_of.at(result.state.arms[k][0])] += result.state.pulls[k];
    bool strict = true;
    for (std::size_t a = 0; a + 1 < p.size(); ++a) strict = strict && pulls[4] > pulls[a];
    wins += strict;
  }
  return {wins >= 18, "best arm strictly most pulled in " + std::to_string(wins) + "/20 runs (need 18)"};
}

// 4. Bayes selection on a synthetic quality landscape over hashed embeddings.
Outcome criterion_bayes() {
  const std::vector<std::string> vocabulary{
      "classify", "label",   "answer",  "reason",  "careful", "step",   "verify",  "context", "evidence", "concise",
      "sentence", "review",  "signal",  "pattern", "explain", "justify", "compare", "weigh",  "summary",  "detail",
      "premise",  "claim",   "support", "refute",  "neutral", "strict", "format",  "output", "options",  "choice"};
  HashingEmbedder embedder;
  int good_trials = 0;
  double mean_hits = 0.0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    std::mt19937_64 engine(4000 + trial);
    auto phrase = [&](std::size_t words) {
      std::string text;
      for (std::size_t i = 0; i < words; ++i) text += (i ? " " : "") + vocabulary[engine() % vocabulary.size()];
      return text;
    };
    const auto target = embedder.embed(phrase(6));
    auto quality = [&](const std::vector<double>& x) {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * target[i];
      return dot;
    };
    std::vector<GprPoint> history;
    for (int i = 0; i < 10; ++i) {
      auto x = embedder.embed(phrase(6));
      history.push_back({x, quality(x)});
    }
    std::vector<PromptCandidate> pool;
    double pool_mean = 0.0;
    for (int i = 0; i < 50; ++i) {
      PromptCandidate c;
      c.id = "c" + std::to_string(100 + i);
      c.text = phrase(6) + " #" + std::to_string(i);
      c.embedding = embedder.embed(c.text);
      pool_mean += quality(*c.embedding) / 50.0;
      pool.push_back(std::move(c));
    }
    const auto picked = bayes_select(pool, history, AcquisitionConfig{0.01, 6});
    int hits = 0;
    for (const auto& c : picked) hits += quality(*c.embedding) > pool_mean;
    mean_hits += hits / 50.0;
    good_trials += hits >= 4;
  }
  return {good_trials >= 40, ">= 4/6 above pool mean in " + std::to_string(good_trials) +
                                 "/50 trials (need 40), mean " + fmt("%.2f", mean_hits) + "/6"};
}

using Rows = std::vector<std::vector<Prediction>>;

PredictionMatrix as_matrix(const Rows& rows, std::size_t m) {
  PredictionMatrix matrix;
  for (std::size_t i = 0; i < rows.size(); ++i) matrix.example_ids.push_back("e" + std::to_string(i));
  for (std::size_t j = 0; j < m; ++j) matrix.member_ids.push_back("m" + std::to_string(j));
  matrix.cells = rows;
  return matrix;
}

// Random members of varying accuracy over labels {A, B, C}.
void random_task(std::mt19937_64& engine, std::size_t rows, std::size_t members, Rows& out, std::vector<Label>& golds) {
  const char* labels[] = {"A", "B", "C"};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> skill(members);
  for (auto& s : skill) s = 0.3 + 0.5 * unit(engine);
  out.assign(rows, {});
  golds.clear();
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t gold = engine() % 3;
    golds.push_back(labels[gold]);
    for (std::size_t j = 0; j < members; ++j) {
      const double u = unit(engine);
      if (u < skill[j]) {
        out[i].push_back(Prediction(labels[gold]));
      } else if (u < skill[j] + 0.05) {
        out[i].push_back(std::nullopt);
      } else {
        out[i].push_back(Prediction(labels[(gold + 1 + engine() % 2) % 3]));
      }
    }
  }
}

// 5. Pattern search against a 0.05 grid over the floored simplex.
Outcome criterion_weights() {
  EnsembleConfig config;
  config.members = 4;
  config.lambda = 1e-3;
  config.min_weight = 0.05;
  int pass = 0;
  double worst_gap = -1e300;
  for (std::uint64_t c = 0; c < 25; ++c) {
    std::mt19937_64 engine(5000 + c);
    Rows rows;
    std::vector<Label> golds;
    random_task(engine, 20, 4, rows, golds);
    double grid_best = 1e300;
    oracle::simplex_grid(4, 20, 0.05, [&](const std::vector<double>& w) {
      grid_best = std::min(grid_best, oracle::objective(rows, golds, w, config.lambda));
    });
    const auto w = optimize_weights(as_matrix(rows, 4), golds, config, c);
    const double value = oracle::objective(rows, golds, w, config.lambda);
    const double uniform = oracle::objective(rows, golds, {0.25, 0.25, 0.25, 0.25}, config.lambda);
    worst_gap = std::max(worst_gap, value - grid_best);
    pass += value <= grid_best + 1e-6 && value <= uniform + 1e-15;
  }
  return {pass == 25, std::to_string(pass) + "/25 cases at or below the grid optimum and uniform; worst gap " +
                          fmt("%.2e", worst_gap)};
}

// 6. Exhaustive voting and metric oracles.
Outcome criterion_oracles() {
  const std::vector<Prediction> choices{Prediction("A"), Prediction("B"), Prediction("C"), std::nullopt};
  std::size_t vote_cases = 0, vote_mismatch = 0;
  for (std::size_t m = 1; m <= 4; ++m) {
    std::size_t tuples = 1, weight_sets = 1;
    for (std::size_t j = 0; j < m; ++j) {
      tuples *= choices.size();
      weight_sets *= 4;
    }
    for (std::size_t t = 0; t < tuples; ++t) {
      std::vector<Prediction> preds;
      for (std::size_t j = 0, code = t; j < m; ++j, code /= choices.size()) preds.push_back(choices[code % choices.size()]);
      for (std::size_t s = 0; s < weight_sets; ++s) {
        std::vector<long> integer;
        long total = 0;
        for (std::size_t j = 0, code = s; j < m; ++j, code /= 4) {
          integer.push_back(1 + static_cast<long>(code % 4));
          total += integer.back();
        }
        std::vector<double> weights;
        for (long k : integer) weights.push_back(static_cast<double>(k) / total);
        const auto expected = oracle::vote_exact(preds, integer);
        const auto got = weighted_vote(preds, weights);
        const Prediction got_norm = got ? Prediction(normalize_label(*got)) : std::nullopt;
        ++vote_cases;
        vote_mismatch += got_norm != expected;
      }
    }
  }

  // Metric oracle over integer-coded labels; 3 means INVALID.
  static const Label names[] = {"A", "B", "C"};
  std::size_t f1_cases = 0, f1_mismatch = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::size_t gold_count = 1, pred_count = 1;
    for (std::size_t i = 0; i < n; ++i) {
      gold_count *= 3;
      pred_count *= 4;
    }
    std::vector<Label> golds(n);
    std::vector<Prediction> preds(n);
    std::vector<int> g(n), p(n);
    for (std::size_t gc = 0; gc < gold_count; ++gc) {
      for (std::size_t i = 0, code = gc; i < n; ++i, code /= 3) {
        g[i] = static_cast<int>(code % 3);
        golds[i] = names[g[i]];
      }
      for (std::size_t pc = 0; pc < pred_count; ++pc) {
        for (std::size_t i = 0, code = pc; i < n; ++i, code /= 4) {
          p[i] = static_cast<int>(code % 4);
          preds[i] = p[i] == 3 ? Prediction() : Prediction(names[p[i]]);
        }
        int confusion[3][4] = {};
        for (std::size_t i = 0; i < n; ++i) ++confusion[g[i]][p[i]];
        double sum = 0.0;
        int classes = 0;
        for (int c = 0; c < 3; ++c) {
          int actual = 0, predicted = 0;
          for (int k = 0; k < 4; ++k) actual += confusion[c][k];
          for (int r = 0; r < 3; ++r) predicted += confusion[r][c];
          if (actual == 0 && predicted == 0) continue;
          ++classes;
          const int tp = confusion[c][c];
          sum += tp == 0 ? 0.0 : 2.0 * tp / (actual + predicted);
        }
        const double expected = sum / classes;
        ++f1_cases;
        f1_mismatch += std::abs(macro_f1(preds, golds) - expected) > 1e-12;
      }
    }
  }
  return {vote_mismatch == 0 && f1_mismatch == 0,
          "weighted_vote " + std::to_string(vote_cases - vote_mismatch) + "/" + std::to_string(vote_cases) +
              ", macro_f1 " + std::to_string(f1_cases - f1_mismatch) + "/" + std::to_string(f1_cases)};
}

// 7. Offline end-to-end run on the synthetic 40-example task.
Outcome criterion_end_to_end() {
  fixtures::TempDir a("accept-a"), b("accept-b");
  RunOptions options;
  options.write_timing = false;
  const auto first = run_optimize(fixtures::synthetic_config(a.path()), options);
  run_optimize(fixtures::synthetic_config(b.path()), options);
  const auto& state = first.state;

  bool monotone = state.trajectory.size() == 3;
  double previous = -1.0;
  for (const auto& s : state.trajectory) {
    monotone = monotone && s.best_score >= previous;
    previous = s.best_score;
  }
  const auto& r = *state.results;
  const double best_member = *std::max_element(r.member_train_macro_f1.begin(), r.member_train_macro_f1.end());
  const bool ensemble_ok = r.train_macro_f1 >= best_member - 1e-9;
  const bool identical = fixtures::read_file(a / "report.json") == fixtures::read_file(b / "report.json");
  const bool pass = state.completed && monotone && ensemble_ok && identical;
  return {pass, std::string("completed ") + (state.completed ? "yes" : "no") + ", best non-decreasing " +
                    (monotone ? "yes" : "no") + ", ensemble train F1 " + fmt("%.4f", r.train_macro_f1) +
                    " vs best member " + fmt("%.4f", best_member) + ", identical reports " + (identical ? "yes" : "no")};
}

std::string random_output(std::mt19937_64& engine) {
  static const std::vector<std::string> pieces{
      "[", "]", "{", "}", "\"label\"", ":", ",", "\"", "```", "```json", "\n", " ", "yes", "NO", "3,472", "-0.5e9",
      "null", "true", "[{\"label\":", "{\"label\": [1,2]}", "\\u0000", "\xff\xfe", "\xc3\xa9", "1e400", "..", "label",
      "[{\"label\":\"yes\"}]", "0x1F", "+", "-", "answer is", "[[[[[[", "}}}}", "\t", "\\", "NaN", "Infinity"};
  std::string out;
  const std::size_t parts = engine() % 12;
  for (std::size_t i = 0; i < parts; ++i) {
    if (engine() % 5 == 0) {
      out += static_cast<char>(engine() % 256);
    } else {
      out += pieces[engine() % pieces.size()];
    }
  }
  return out;
}

// 8. Feasibility of fitted weights and a total label parser.
Outcome criterion_feasibility() {
  std::mt19937_64 engine(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t infeasible = 0;
  double worst_sum = 0.0;
  for (int call = 0; call < 1000; ++call) {
    const std::size_t m = 1 + engine() % 6;
    EnsembleConfig config;
    config.members = m;
    config.min_weight = std::max(1e-6, unit(engine) / m);
    config.lambda = unit(engine) < 0.2 ? 0.0 : unit(engine) * 0.01;
    config.random_starts = engine() % 4;
    Rows rows;
    std::vector<Label> golds;
    random_task(engine, 1 + engine() % 15, m, rows, golds);
    const auto w = optimize_weights(as_matrix(rows, m), golds, config, engine());
    double sum = 0.0;
    bool floor_ok = w.size() == m;
    for (double x : w) {
      sum += x;
      floor_ok = floor_ok && x >= config.min_weight;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    infeasible += !(floor_ok && std::abs(sum - 1.0) <= 1e-9);
  }

  std::size_t threw = 0;
  const std::vector<LabelSpace> spaces{LabelSpace{}, LabelSpace({"yes", "no"}), LabelSpace({"A", "B", "C"})};
  for (int call = 0; call < 1000; ++call) {
    const std::string raw = random_output(engine);
    try {
      (void)parse_label(raw, spaces[engine() % spaces.size()]);
    } catch (...) {
      ++threw;
    }
  }
  return {infeasible == 0 && threw == 0, std::to_string(1000 - infeasible) + "/1000 feasible weight vectors (max |sum-1| " +
                                             fmt("%.1e", worst_sum) + "), parse_label threw " + std::to_string(threw) +
                                             "/1000"};
}

struct Criterion {
  int number;
  const char* name;
  double time_limit;  // seconds; 0 means none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "EI oracle agreement", 30.0, criterion_ei},
      {2, "GPR correctness", 0.0, criterion_gpr},
      {3, "UCB bandit sanity", 10.0, criterion_bandit},
      {4, "search efficiency", 60.0, criterion_bayes},
      {5, "weight optimizer oracle", 120.0, criterion_weights},
      {6, "voting and metric oracles", 0.0, criterion_oracles},
      {7, "end-to-end scripted run", 60.0, criterion_end_to_end},
      {8, "feasibility invariants", 0.0, criterion_feasibility},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool all = true;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.contains(c.number)) continue;
    const auto started = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::string timing = fmt("%.2fs", seconds);
    if (c.time_limit > 0.0) {
      timing += " (limit " + fmt("%.0fs", c.time_limit) + ")";
      if (seconds >= c.time_limit) {
        outcome.pass = false;
        outcome.detail += "; over time limit";
      }
    }
    std::printf("criterion %d %s: %s | %s | %s\n", c.number, outcome.pass ? "PASS" : "FAIL", c.name,
                outcome.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    all = all && outcome.pass;
  }
  return all ? 0 : 1;
}
