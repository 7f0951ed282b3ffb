"""Filter-based regularization of statistical linear inverse problems with
SOLIT, Lepskii-type, oracle and noise-level parameter choice rules, plus a
Monte Carlo experiment harness for convergence-rate studies."""

from .candidates import (
    CandidateGrid,
    build_grid,
    hutchinson_trace,
    line_search_variance,
    pairwise_variance_v,
    variance_V,
    weak_variance_u,
)
from .errors import ConfigurationError, InvalidParameterError
from .filters import (
    FilterSpec,
    ValidationReport,
    filter_weight,
    residual_weight,
    validate_ordered_filter,
)
from .genchi2 import (
    WeightVector,
    critical_value_z,
    cumulant_traces,
    ltz_quantile_for_weights,
    ltz_tail_quantile,
    ltz_tail_sf,
    mc_tail_quantile,
    noncentral_chi2_sf,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    deterministic_tables,
    fit_rate,
    read_results,
    run_experiment,
    verify_oracle_inequality,
    write_results,
)
from .selectors import (
    ThresholdTable,
    build_thresholds,
    lepskii_select,
    noise_level_select,
    optimal_select,
    oracle_constants,
    oracle_select,
    price_of_adaptation,
    solit_select,
)
from .sequence_model import (
    DataRealization,
    SpectralProblem,
    estimate,
    pairwise_distance,
    simulate_data,
    squared_error,
)
from .testproblems import (
    antiderivative_problem,
    get_problem,
    gradiometry_problem,
    heat_problem,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateGrid",
    "ConfigurationError",
    "DataRealization",
    "ExperimentConfig",
    "ExperimentResult",
    "FilterSpec",
    "InvalidParameterError",
    "SpectralProblem",
    "ThresholdTable",
    "ValidationReport",
    "WeightVector",
    "antiderivative_problem",
    "build_grid",
    "build_thresholds",
    "critical_value_z",
    "cumulant_traces",
    "deterministic_tables",
    "estimate",
    "filter_weight",
    "fit_rate",
    "get_problem",
    "gradiometry_problem",
    "heat_problem",
    "hutchinson_trace",
    "lepskii_select",
    "line_search_variance",
    "ltz_quantile_for_weights",
    "ltz_tail_quantile",
    "ltz_tail_sf",
    "mc_tail_quantile",
    "noise_level_select",
    "noncentral_chi2_sf",
    "optimal_select",
    "oracle_constants",
    "oracle_select",
    "pairwise_distance",
    "pairwise_variance_v",
    "price_of_adaptation",
    "read_results",
    "residual_weight",
    "run_experiment",
    "simulate_data",
    "solit_select",
    "squared_error",
    "synthesize",
    "validate_ordered_filter",
    "variance_V",
    "verify_oracle_inequality",
    "weak_variance_u",
    "write_results",
]
