"""Renormalization-group link between ARMA models and linear stochastic differential equations."""

from .arma import autocovariance, increment_covariance, new_arma, simulate
from .decimation import decimate_arma21, decimate_general, q_rule
from .exceptions import (
    ArmaRgError,
    CodecError,
    ConfigError,
    DegenerateSamplingError,
    EstimationError,
    FactorizationError,
    InvalidCovarianceError,
    InvalidParameterError,
    NonStationaryError,
    UnsupportedOrderError,
)
from .inference import arma21_mle, effective_mle, euler_mle, quartic_experiment
from .models import (
    Arma21Fit,
    Arma21Params,
    ArmaModel,
    EstimateReport,
    FixedPointSpec,
    LinearSde2D,
    TaylorParams,
    TimeSeries,
)
from .rg_flow import classify, flow, make_fixed_point, rg_step
from .sde_exact import euler_discretize, exact_arma_params, exact_to_sde, simulate_exact

__version__ = "0.1.0"

__all__ = [
    "ArmaModel",
    "ArmaRgError",
    "Arma21Fit",
    "Arma21Params",
    "CodecError",
    "ConfigError",
    "DegenerateSamplingError",
    "EstimateReport",
    "EstimationError",
    "FactorizationError",
    "FixedPointSpec",
    "InvalidCovarianceError",
    "InvalidParameterError",
    "LinearSde2D",
    "NonStationaryError",
    "TaylorParams",
    "TimeSeries",
    "UnsupportedOrderError",
    "arma21_mle",
    "autocovariance",
    "classify",
    "decimate_arma21",
    "decimate_general",
    "effective_mle",
    "euler_discretize",
    "euler_mle",
    "exact_arma_params",
    "exact_to_sde",
    "flow",
    "increment_covariance",
    "make_fixed_point",
    "new_arma",
    "q_rule",
    "quartic_experiment",
    "rg_step",
    "simulate",
    "simulate_exact",
]
