"""Holding-time constrained optimal linear filters for multivariate series.

The package designs causal filters that maximise tracking of a target
signal subject to an exact smoothness constraint on the filter output
(its expected time between zero crossings), and ships the model
algebra, benchmarks, metrics and experiment harness around them.
"""

from .config import ExperimentConfig, bundled_config, load_config
from .errors import (
    DataError,
    MssaError,
    NonStationaryError,
    NoSolutionError,
    ValidationError,
)
from .estimator import MSSAFilter
from .metrics import (
    MetricReport,
    acf_from_ht,
    empirical_metrics,
    expected_metrics,
    ht_from_acf,
    rms_second_diff,
    sa_from_corr,
)
from .processes import (
    MAExpansion,
    VarmaModel,
    apply_filter,
    convolve,
    deconvolve,
    fit_var_least_squares,
    full_convolution,
    ma_inversion,
    simulate,
)
from .solver import (
    HtConstraint,
    MssaSolution,
    SpectralWeights,
    estimator_distribution,
    rho_of_nu,
    solve_b_of_nu,
    solve_boundary,
    solve_dual,
    solve_mssa,
    spectral_weights,
)
from .targets import (
    BenchmarkFilter,
    TargetSpec,
    allpass_shift,
    hp_concurrent,
    hp_two_sided,
    mse_nowcast,
    whittaker_matrix_row,
)
from .tridiag import (
    NoiseCovariance,
    TridiagSpectrum,
    build_spectrum,
    quad_form_I,
    quad_form_M,
    rho_max,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "bundled_config",
    "load_config",
    "DataError",
    "MssaError",
    "NonStationaryError",
    "NoSolutionError",
    "ValidationError",
    "MSSAFilter",
    "MetricReport",
    "acf_from_ht",
    "empirical_metrics",
    "expected_metrics",
    "ht_from_acf",
    "rms_second_diff",
    "sa_from_corr",
    "MAExpansion",
    "VarmaModel",
    "apply_filter",
    "convolve",
    "deconvolve",
    "fit_var_least_squares",
    "full_convolution",
    "ma_inversion",
    "simulate",
    "HtConstraint",
    "MssaSolution",
    "SpectralWeights",
    "estimator_distribution",
    "rho_of_nu",
    "solve_b_of_nu",
    "solve_boundary",
    "solve_dual",
    "solve_mssa",
    "spectral_weights",
    "BenchmarkFilter",
    "TargetSpec",
    "allpass_shift",
    "hp_concurrent",
    "hp_two_sided",
    "mse_nowcast",
    "whittaker_matrix_row",
    "NoiseCovariance",
    "TridiagSpectrum",
    "build_spectrum",
    "quad_form_I",
    "quad_form_M",
    "rho_max",
]
