import json
import math
import os
import pathlib

import pytest

import ensprompt

DATA = pathlib.Path(os.environ.get("ENSPROMPT_TEST_DATA_DIR", pathlib.Path(__file__).parents[2] / "tests" / "data"))


def test_parse_label():
    assert ensprompt.parse_label('[{"label": "Yes"}]', ["yes", "no"]) == "yes"
    assert ensprompt.parse_label("```json\n[{\"label\": \"no\"}]\n```", ["yes", "no"]) == "no"
    assert ensprompt.parse_label("maybe", ["yes", "no"]) is None
    assert ensprompt.parse_label("the answer is 3,472") == "3472"
    assert ensprompt.normalize_label("  Positive. ") == "positive"


def test_metrics_and_vote():
    assert ensprompt.macro_f1(["A", "B", None], ["A", "B", "B"]) == pytest.approx((1.0 + 2 / 3) / 2)
    assert ensprompt.accuracy(["A", None], ["A", "B"]) == 0.5
    assert ensprompt.normalize_label(ensprompt.weighted_vote(["A", "B", "B"], [0.5, 0.3, 0.2])) == "a"
    assert ensprompt.weighted_vote([None, None], [0.5, 0.5]) is None


def test_fit_weights_is_feasible():
    rows = [["A", "A", "B"], ["B", "A", "B"], ["C", "C", "A"], ["A", "B", "A"]]
    fit = ensprompt.fit_weights(rows, ["A", "B", "C", "A"], lam=1e-3, min_weight=0.05, seed=3)
    assert math.isclose(sum(fit["weights"]), 1.0, abs_tol=1e-9)
    assert min(fit["weights"]) >= 0.05
    assert fit["objective"] <= fit["uniform_objective"]
    with pytest.raises(ValueError):
        ensprompt.fit_weights(rows, ["A", "B", "C", "A"], min_weight=0.5)


def test_ei_and_gpr():
    # sigma -> 0 reduces EI to the plain improvement.
    assert ensprompt.expected_improvement(0.7, 0.0, 0.5, 0.0) == pytest.approx(0.2)
    assert ensprompt.expected_improvement(0.5, 1.0, 0.5, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    posterior = ensprompt.gpr_predict([[0.0], [1.0]], [0.0, 1.0], [[0.0], [1.0], [50.0]], noise=1e-9)
    assert posterior[0][0] == pytest.approx(0.0, abs=1e-5)
    assert posterior[1][0] == pytest.approx(1.0, abs=1e-5)
    assert posterior[2][0] == pytest.approx(0.5, abs=1e-6)  # reverts to the mean of y far away


def test_hashing_embed_is_unit_norm():
    v = ensprompt.hashing_embed("classify the sentiment")
    assert len(v) == 256
    assert sum(x * x for x in v) == pytest.approx(1.0)


def test_cli_round_trip(tmp_path):
    config = DATA / "synthetic" / "config.json"
    code, _, err = ensprompt.run_cli(["validate-config", "--config", str(config)])
    assert code == 0, err
    code, _, err = ensprompt.run_cli(["optimize", "--config", str(config), "--set", f"artifact_dir={tmp_path}"])
    assert code == 0, err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report
    code, out, _ = ensprompt.run_cli(["report", str(tmp_path)])
    assert code == 0 and "ENSEMBLE" in out
    code, _, _ = ensprompt.run_cli(["optimize", "--config", str(tmp_path / "missing.json")])
    assert code == 2
