"""Exception hierarchy for arma_rg."""

from __future__ import annotations

from typing import Any


class ArmaRgError(Exception):
    """Base class for all arma_rg errors."""


class InvalidParameterError(ArmaRgError, ValueError):
    """Raised when a model or operation parameter is out of range."""


class ConfigError(ArmaRgError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None) -> None:
        super().__init__(message)
        self.field = field
        self.line = line


class CodecError(ArmaRgError):
    """Raised when a serialized series or model cannot be decoded."""


class NonStationaryError(ArmaRgError):
    """Raised when an operation requires a stationary model."""


class InvalidCovarianceError(ArmaRgError, ValueError):
    """Raised when an increment covariance is not positive semidefinite."""


class FactorizationError(ArmaRgError):
    """Raised when the MA spectral factorization does not converge."""


class UnsupportedOrderError(ArmaRgError):
    """Raised when a fixed-point template is requested beyond its tabulated order."""


class DegenerateSamplingError(ArmaRgError):
    """Raised when the sampling interval hits an oscillation node of e^{A tau}."""


class EstimationError(ArmaRgError):
    """Raised when a likelihood fit is singular or the optimizer fails."""

    def __init__(self, message: str, best_iterate: Any = None) -> None:
        super().__init__(message)
        self.best_iterate = best_iterate
