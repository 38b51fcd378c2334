#include <doctest.h>

#include <random>

#include "ensprompt/core/dataset.hpp"
#include "ensprompt/core/labels.hpp"
#include "ensprompt/core/metrics.hpp"
#include "ensprompt/core/pool.hpp"
#include "ensprompt/core/serialization.hpp"
#include "ensprompt/errors.hpp"
#include "ensprompt/rng.hpp"
#include "oracles.hpp"
#include "fixtures.hpp"

using namespace ensprompt;

namespace {

std::vector<Prediction> preds(std::initializer_list<const char*> labels) {
  std::vector<Prediction> out;
  for (const char* l : labels) out.push_back(l ? Prediction(l) : std::nullopt);
  return out;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("parse_label reads the strict JSON payload") {
  const LabelSpace yes_no({"YES", "NO"});
  CHECK(parse_label(R"([{"label":"NO"}])", yes_no) == Prediction("NO"));
  CHECK(parse_label(R"({"label": "yes"})", yes_no) == Prediction("YES"));
  CHECK(parse_label("```json\n[{\"label\":\"NO\"}]\n```", yes_no) == Prediction("NO"));
}

TEST_CASE("parse_label falls back to exact match and numbers") {
  const LabelSpace yes_no({"YES", "NO"});
  CHECK(parse_label("YES", yes_no) == Prediction("YES"));
  CHECK(parse_label("  no. ", yes_no) == Prediction("NO"));
  CHECK_FALSE(parse_label("maybe", yes_no).has_value());
  CHECK_FALSE(parse_label("", yes_no).has_value());
  // Hand-applied normalization: drop the comma, keep the last number.
  CHECK(parse_label("The answer is 3,472.", LabelSpace{}) == Prediction("3472"));
  CHECK(parse_label("first 12 then 0,045.50", LabelSpace{}) == Prediction("45.5"));
  CHECK_FALSE(parse_label("no digits here", LabelSpace{}).has_value());
}

TEST_CASE("parse_label is idempotent through serialize_label") {
  const LabelSpace abc({"A", "B", "C"});
  for (const char* raw : {R"([{"label":"b"}])", "C", "```\n[{\"label\": \"A\"}]\n```"}) {
    const auto first = parse_label(raw, abc);
    REQUIRE(first.has_value());
    CHECK(parse_label(serialize_label(*first), abc) == first);
  }
  const auto number = parse_label("total: 1,200", LabelSpace{});
  REQUIRE(number.has_value());
  CHECK(parse_label(serialize_label(*number), LabelSpace{}) == number);
}

TEST_CASE("label normalization") {
  CHECK(normalize_label("  Yes!! ") == "yes");
  CHECK(normalize_label("3,472") == "3472");
  CHECK(normalize_number("+0,012.50") == std::optional<std::string>("12.5"));
  CHECK_FALSE(normalize_number("12a").has_value());
  CHECK(normalize_prompt_text("  Answer   YES\n or no ") == "answer yes or no");
}

TEST_CASE("macro_f1 examples") {
  const std::vector<Label> golds{"A", "A", "B", "B"};
  CHECK(macro_f1(preds({"A", "A", "B", "B"}), golds) == doctest::Approx(1.0));
  CHECK(macro_f1(preds({"B", "B", "A", "A"}), golds) == doctest::Approx(0.0));
  // Hand confusion matrix: F1(A) = 2/3, F1(B) = 0.8.
  CHECK(macro_f1(preds({"A", "B", "B", "B"}), golds) == doctest::Approx((2.0 / 3.0 + 0.8) / 2).epsilon(1e-12));
}

TEST_CASE("macro_f1 contract violations") {
  const std::vector<Label> golds{"A", "B"};
  CHECK_THROWS_AS(macro_f1(preds({"A"}), golds), ContractViolation);
  CHECK_THROWS_AS(macro_f1(std::vector<Prediction>{}, std::vector<Label>{}), ContractViolation);
  CHECK_THROWS_AS(macro_f1(preds({"A", "B"}), std::vector<Label>{"A", "Z"}, LabelSpace({"A", "B"})),
                  ContractViolation);
}

TEST_CASE("accuracy examples") {
  const std::vector<Label> golds{"A", "B", "C", "D"};
  CHECK(accuracy(preds({"A", "B", "C", "D"}), golds) == 1.0);
  CHECK(accuracy(preds({"A", "C", "D", "B"}), golds) == 0.25);
  CHECK(accuracy(preds({nullptr, "B", "C", "D"}), golds) == 0.75);
  CHECK_THROWS_AS(accuracy(preds({"A"}), golds), ContractViolation);
}

TEST_CASE("metrics match the confusion-matrix oracle on random inputs") {
  std::mt19937_64 engine(11);
  const char* labels[] = {"A", "B", "C", "d", nullptr};
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + engine() % 12;
    std::vector<Label> golds;
    std::vector<Prediction> p;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(labels[engine() % 4]);
      const char* l = labels[engine() % 5];
      p.push_back(l ? Prediction(l) : std::nullopt);
    }
    const double f1 = macro_f1(p, golds);
    CHECK(f1 == doctest::Approx(oracle::macro_f1(p, golds)).epsilon(1e-12));
    CHECK(f1 >= 0.0);
    CHECK(f1 <= 1.0);
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) all = all && labels_match(p[i], golds[i]);
    CHECK((f1 == 1.0) == all);
    CHECK((accuracy(p, golds) == 1.0) == all);
  }
}

TEST_CASE("pool dedups by normalized text and id") {
  CandidatePool pool;
  CHECK(pool.insert({"p1", "Answer yes or no.", Origin::seed, {}, {}}));
  CHECK_FALSE(pool.insert({"p2", "  answer YES   or no. ", Origin::seed, {}, {}}));
  CHECK_FALSE(pool.insert({"p1", "different text", Origin::seed, {}, {}}));
  CHECK(pool.size() == 1);
  CHECK(pool.contains_text("ANSWER yes or no."));
  CHECK(pool.insert({"p3", "Another prompt", Origin::bad_case_reflection, {}, 0.5}));
  CHECK(pool.evaluated().size() == 1);
  CHECK(pool.unevaluated().size() == 1);
  CHECK(make_candidate_id(31) == "p000031");
}

TEST_CASE("jsonl parsing") {
  const auto examples = parse_jsonl("{\"input\":\"a\",\"expected\":\"x\"}\n\n{\"id\":\"k\",\"input\":\"b\",\"expected\":\"y\"}\n");
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].id == "1");
  CHECK(examples[1].id == "k");
  CHECK_THROWS_AS(parse_jsonl(""), LoadError);
  CHECK_THROWS_AS(parse_jsonl("{\"input\":1,\"expected\":\"x\"}"), LoadError);
  CHECK_THROWS_AS(parse_jsonl("not json"), LoadError);
  CHECK_THROWS_AS(parse_jsonl("{\"id\":\"a\",\"input\":\"x\",\"expected\":\"y\"}\n{\"id\":\"a\",\"input\":\"z\",\"expected\":\"y\"}"),
                  LoadError);
  CHECK_THROWS_AS(load_jsonl(fixtures::data_dir() / "does-not-exist.jsonl"), LoadError);
  CHECK(load_jsonl(fixtures::synthetic_dir() / "train.jsonl").size() == 40);
}

TEST_CASE("dataset validation") {
  Dataset ok{{{"1", "q", "yes"}}, LabelSpace({"yes", "no"}), Metric::macro_f1};
  CHECK_NOTHROW(ok.validate());
  Dataset bad{{{"1", "q", "maybe"}}, LabelSpace({"yes", "no"}), Metric::macro_f1};
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  Dataset empty{{}, LabelSpace{}, Metric::accuracy};
  CHECK_THROWS_AS(empty.validate(), ContractViolation);
}

TEST_CASE("split_holdout is seeded and keeps file order") {
  const auto examples = load_jsonl(fixtures::synthetic_dir() / "train.jsonl");
  const auto a = split_holdout(examples, 0.2, 5);
  const auto b = split_holdout(examples, 0.2, 5);
  CHECK(a.second.size() == 8);
  CHECK(a.first.size() == 32);
  REQUIRE(a.second.size() == b.second.size());
  for (std::size_t i = 0; i < a.second.size(); ++i) CHECK(a.second[i].id == b.second[i].id);
  for (std::size_t i = 1; i < a.first.size(); ++i) CHECK(a.first[i - 1].id < a.first[i].id);
}

TEST_CASE("evaluation record aggregate is recomputable") {
  EvaluationRecord record;
  record.prompt_id = "p1";
  record.metric = Metric::accuracy;
  record.per_example = {{"1", "yes", Prediction("yes"), "yes", true},
                        {"2", "??", std::nullopt, "no", false},
                        {"3", "no", Prediction("no"), "no", true}};
  record.aggregate = recompute_aggregate(record);
  CHECK(record.aggregate == doctest::Approx(2.0 / 3.0));
  CHECK(record.failure_count() == 1);
  const nlohmann::json doc = record;
  CHECK(doc["per_example"][1]["parsed"].is_null());
  const auto back = doc.get<EvaluationRecord>();
  CHECK(std::abs(recompute_aggregate(back) - back.aggregate) <= 1e-12);
  CHECK_FALSE(back.per_example[1].parsed.has_value());
}

TEST_CASE("prediction matrix must be dense") {
  PredictionMatrix m{{"e1", "e2"}, {"a", "b"}, {{Prediction("x"), std::nullopt}, {Prediction("y")}}};
  CHECK_THROWS_AS(m.validate(), ContractViolation);
  m.cells[1].push_back(std::nullopt);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("rng is reproducible and serializable") {
  Rng a(42), b(42);
  for (int i = 0; i < 5; ++i) CHECK(a.next() == b.next());
  const auto saved = a.serialize();
  const double x = a.uniform();
  Rng restored = Rng::deserialize(saved);
  CHECK(restored.uniform() == x);
  const auto picks = a.sample_without_replacement(10, 10);
  CHECK(std::set<std::size_t>(picks.begin(), picks.end()).size() == 10);
}

}
