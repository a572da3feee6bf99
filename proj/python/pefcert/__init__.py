"""Device-independent randomness certification with probability estimation factors."""

from ._core import (
    NumericalError,
    ValidationError,
    certificate_rate,
    certify,
    chsh_expectation,
    cli,
    family_eberhard,
    family_unbalanced,
    family_werner,
    improvement_factors,
    model_vertices,
    optimize_pef,
    rate_curve,
    simulate_trials,
    statistical_strength,
)

__all__ = [
    "NumericalError",
    "ValidationError",
    "certificate_rate",
    "certify",
    "chsh_expectation",
    "cli",
    "family_eberhard",
    "family_unbalanced",
    "family_werner",
    "improvement_factors",
    "model_vertices",
    "optimize_pef",
    "rate_curve",
    "simulate_trials",
    "statistical_strength",
]
