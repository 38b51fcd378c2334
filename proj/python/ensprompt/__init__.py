"""Prompt-ensemble optimizer: Python access to the native core."""

from ._core import (
    ContractViolation,
    NumericError,
    accuracy,
    expected_improvement,
    fit_weights,
    gpr_predict,
    hashing_embed,
    macro_f1,
    normalize_label,
    parse_label,
    run_cli,
    weighted_vote,
)

__all__ = [
    "ContractViolation",
    "NumericError",
    "accuracy",
    "expected_improvement",
    "fit_weights",
    "gpr_predict",
    "hashing_embed",
    "macro_f1",
    "normalize_label",
    "parse_label",
    "run_cli",
    "weighted_vote",
]
