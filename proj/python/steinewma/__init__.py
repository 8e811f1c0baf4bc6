"""Stein EWMA and classical control charts for count data."""

from ._core import (
    ArlEstimate,
    CalibrationError,
    CalibrationResult,
    ConfigError,
    DataError,
    FeasibilityError,
    NumericalError,
    ParameterError,
    ChartDesign,
    CountDistribution,
    Family,
    MomentSummary,
    ProcessModel,
    SteinBaselines,
    WeightFunction,
    calibrate_limit,
    estimate_arl,
    exact_arl_markov,
    from_mean_dispersion,
    generate,
    model_for_target,
    parse_family,
    run_cell,
    run_series,
    scenario_ids,
)

__version__ = "0.1.0"

__all__ = [
    "ArlEstimate",
    "CalibrationError",
    "CalibrationResult",
    "ConfigError",
    "DataError",
    "FeasibilityError",
    "NumericalError",
    "ParameterError",
    "ChartDesign",
    "CountDistribution",
    "Family",
    "MomentSummary",
    "ProcessModel",
    "SteinBaselines",
    "WeightFunction",
    "calibrate_limit",
    "estimate_arl",
    "exact_arl_markov",
    "from_mean_dispersion",
    "generate",
    "model_for_target",
    "parse_family",
    "run_cell",
    "run_series",
    "scenario_ids",
]
