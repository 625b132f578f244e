"""Value types shared across the arma_rg modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any, ClassVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .const import PSD_GRID, PSD_RTOL, FixedPointClass, Likelihood, Scheme, Verdict
from .exceptions import InvalidCovarianceError, InvalidParameterError


def _as_coefficients(values: ArrayLike, name: str) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be a flat list of coefficients")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    return tuple(float(v) for v in arr)


def _frozen_array(values: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArmaModel:
    """Discrete generative model X_n = sum phi_i X_{n-i} + mu eps_n + sum nu_j eps_{n-j}."""

    phi: tuple[float, ...] = ()
    nu: tuple[float, ...] = ()
    mu: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", _as_coefficients(self.phi, "phi") if len(self.phi) else ())
        object.__setattr__(self, "nu", _as_coefficients(self.nu, "nu") if len(self.nu) else ())
        if not math.isfinite(self.mu) or self.mu < 0:
            raise InvalidParameterError(f"mu must be finite and non-negative, got {self.mu}")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def q(self) -> int:
        return len(self.nu)

    @property
    def ma_polynomial(self) -> NDArray[np.float64]:
        """Noise weights (mu, nu_1, ..., nu_q) applied to eps_n, eps_{n-1}, ..."""
        return np.array((self.mu, *self.nu), dtype=float)

    @property
    def ar_polynomial(self) -> NDArray[np.float64]:
        """Coefficients of 1 - phi_1 L - ... - phi_p L^p in increasing powers of L."""
        return np.concatenate(([1.0], -np.asarray(self.phi, dtype=float)))

    def to_dict(self) -> dict[str, Any]:
        return {"phi": list(self.phi), "nu": list(self.nu), "mu": self.mu}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ArmaModel:
        return cls(phi=tuple(data.get("phi", ())), nu=tuple(data.get("nu", ())), mu=data["mu"])


@dataclass(frozen=True)
class IncrementCovariance:
    """Autocovariance gamma_0..gamma_q of the random increment r_n."""

    gamma: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gamma) == 0:
            raise InvalidParameterError("gamma needs at least gamma_0")
        object.__setattr__(self, "gamma", _as_coefficients(self.gamma, "gamma"))
        if not self.is_psd():
            raise InvalidCovarianceError(f"increment covariance {self.gamma} is not PSD")

    @property
    def q(self) -> int:
        return len(self.gamma) - 1

    @property
    def alpha(self) -> float:
        return self.gamma[0]

    @property
    def beta(self) -> float:
        return self.gamma[1] if self.q >= 1 else 0.0

    def is_psd(self, rtol: float = PSD_RTOL) -> bool:
        """Whether the banded Toeplitz matrix of gamma is positive semidefinite.

        Equivalent to a non-negative spectral density gamma_0 + 2 sum gamma_k cos(k w).
        """
        gamma = np.asarray(self.gamma)
        if gamma[0] < 0:
            return False
        if self.q == 0:
            return True
        if self.q == 1:
            return bool(gamma[0] * (1.0 + rtol) >= 2.0 * abs(gamma[1]))
        omega = np.linspace(0.0, np.pi, PSD_GRID)
        lags = np.arange(1, self.q + 1)
        density = gamma[0] + 2.0 * np.cos(np.outer(omega, lags)) @ gamma[1:]
        scale = gamma[0] + 2.0 * np.abs(gamma[1:]).sum()
        return bool(density.min() >= -rtol * scale)


@dataclass(frozen=True)
class Arma21Params:
    """ARMA(2,1) in (psi, theta, alpha, beta) form."""

    psi: float
    theta: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not self.is_psd():
            raise InvalidCovarianceError(
                f"alpha={self.alpha} and beta={self.beta} violate alpha >= 2|beta|"
            )

    def is_psd(self, rtol: float = PSD_RTOL) -> bool:
        return self.alpha >= 0 and self.alpha * (1 + rtol) >= 2 * abs(self.beta)

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.psi, self.theta, self.alpha, self.beta], dtype=float)

    @classmethod
    def from_array(cls, values: ArrayLike) -> Arma21Params:
        psi, theta, alpha, beta = (float(v) for v in np.asarray(values, dtype=float))
        return cls(psi, theta, alpha, beta)

    def to_dict(self) -> dict[str, float]:
        return {"psi": self.psi, "theta": self.theta, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observations X_n sampled every tau, with generation provenance."""

    tau: float
    values: NDArray[np.float64]
    seed: int | None = None
    scheme: Scheme = Scheme.EXTERNAL

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise InvalidParameterError(f"tau must be positive, got {self.tau}")
        values = _frozen_array(self.values, "values")
        if values.size == 0:
            raise InvalidParameterError("a time series needs at least one value")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class TaylorParams:
    """Truncated series psi(tau) = sum_k psi_k tau^k (and theta, alpha, beta) to order K."""

    psi: NDArray[np.float64]
    theta: NDArray[np.float64]
    alpha: NDArray[np.float64]
    beta: NDArray[np.float64]

    NAMES: ClassVar[tuple[str, ...]] = ("psi", "theta", "alpha", "beta")

    def __post_init__(self) -> None:
        arrays = [_frozen_array(getattr(self, name), name) for name in self.NAMES]
        if len({a.size for a in arrays}) != 1 or arrays[0].size == 0:
            raise InvalidParameterError("psi, theta, alpha, beta must all have K+1 coefficients")
        for name, arr in zip(self.NAMES, arrays, strict=True):
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:  # noqa: N802
        return int(self.psi.size) - 1

    @classmethod
    def zeros(cls, K: int) -> TaylorParams:  # noqa: N803
        z = np.zeros(K + 1)
        return cls(z, z, z, z)

    @classmethod
    def from_stack(cls, stack: ArrayLike) -> TaylorParams:
        arr = np.asarray(stack, dtype=float)
        return cls(arr[0], arr[1], arr[2], arr[3])

    def stack(self) -> NDArray[np.float64]:
        """Coefficients as a (4, K+1) array in (psi, theta, alpha, beta) order."""
        return np.vstack([self.psi, self.theta, self.alpha, self.beta])

    def replace(self, name: str, k: int, value: float) -> TaylorParams:
        """Return a copy with coefficient k of series `name` set to value."""
        stack = self.stack()
        stack[self.NAMES.index(name), k] = value
        return TaylorParams.from_stack(stack)

    def column_names(self) -> list[str]:
        return [f"{name}_{k}" for name in self.NAMES for k in range(self.K + 1)]

    def to_dict(self) -> dict[str, list[float]]:
        return {name: getattr(self, name).tolist() for name in self.NAMES}


@dataclass(frozen=True)
class FixedPointSpec:
    """Free parameters of one of the four fixed-point families of the RG map."""

    kind: FixedPointClass
    u: float = 0.0  # linear drift, 1/time
    s: float = 0.0  # order-1 noise, X^2/time
    z: float = 0.0  # order-2 AR parameter, class D only
    b: float = 0.0  # order-3 noise, class D only

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FixedPointClass(self.kind))
        if self.kind is not FixedPointClass.D and (self.z != 0 or self.b != 0):
            raise InvalidParameterError(f"z and b only apply to class D, not {self.kind}")
        if self.kind is FixedPointClass.A and self.u != 0:
            raise InvalidParameterError("class A has no drift parameter u")

    def to_dict(self) -> dict[str, Any]:
        return {"class": str(self.kind), "u": self.u, "s": self.s, "z": self.z, "b": self.b}


@dataclass(frozen=True)
class RgOrbit:
    """Iterates l = 0..L of the RG map; stops at the first point past the overflow guard."""

    points: tuple[TaylorParams, ...]
    divergent: bool = False

    def __len__(self) -> int:
        return len(self.points)

    @property
    def last(self) -> TaylorParams:
        return self.points[-1]


@dataclass(frozen=True)
class Classification:
    """Verdict of classify() plus the fitted template parameters."""

    verdict: Verdict
    spec: FixedPointSpec | None
    iterations: int
    residual: float
    limit: TaylorParams

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": str(self.verdict),
            "fixed_point": self.spec.to_dict() if self.spec is not None else None,
            "iterations": self.iterations,
            "residual": self.residual,
            "limit": self.limit.to_dict(),
        }


@dataclass(frozen=True)
class LinearSde2D:
    """dy = A y dt + B dW, A = [[-lam, 1], [-kappa, -eta]], BB^T = [[sxx2, sxv2], [sxv2, svv2]]."""

    lam: float = 0.0
    kappa: float = 0.0
    eta: float = 0.0
    sxx2: float = 0.0
    sxv2: float = 0.0
    svv2: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{f.name} must be finite, got {value}")
            object.__setattr__(self, f.name, float(value))
        scale = max(self.sxx2, self.svv2, abs(self.sxv2), 1e-300)
        if (
            self.sxx2 < 0
            or self.svv2 < 0
            or self.sxx2 * self.svv2 - self.sxv2**2 < -PSD_RTOL * scale**2
        ):
            raise InvalidParameterError("diffusion matrix [[sxx2, sxv2], [sxv2, svv2]] is not PSD")

    @property
    def drift(self) -> NDArray[np.float64]:
        return np.array([[-self.lam, 1.0], [-self.kappa, -self.eta]])

    @property
    def diffusion(self) -> NDArray[np.float64]:
        return np.array([[self.sxx2, self.sxv2], [self.sxv2, self.svv2]])

    def is_stable(self, strict: bool = False) -> bool:
        """Eigenvalues of the drift have non-positive (negative when strict) real part."""
        trace = -(self.lam + self.eta)
        det = self.lam * self.eta + self.kappa
        if strict:
            return trace < 0 and det > 0
        return trace <= 0 and det >= 0

    def to_dict(self) -> dict[str, float]:
        return {
            "lambda": self.lam,
            "kappa": self.kappa,
            "eta": self.eta,
            "sxx2": self.sxx2,
            "sxv2": self.sxv2,
            "svv2": self.svv2,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LinearSde2D:
        return cls(
            lam=data.get("lambda", 0.0),
            kappa=data.get("kappa", 0.0),
            eta=data.get("eta", 0.0),
            sxx2=data.get("sxx2", 0.0),
            sxv2=data.get("sxv2", 0.0),
            svv2=data.get("svv2", 0.0),
        )


@dataclass(frozen=True)
class VelocityStats:
    """Lag-0 and lag-1 moments of the reconstructed velocity (X_{n+1} - X_n)/tau."""

    v2: float
    v1v2: float
    n_used: int
    stderr2: float
    stderr12: float

    def __post_init__(self) -> None:
        if self.n_used < 2:
            raise InvalidParameterError("velocity statistics need at least two velocities")
        if self.stderr2 < 0 or self.stderr12 < 0:
            raise InvalidParameterError("standard errors must be non-negative")

    @property
    def correlation(self) -> float:
        """E[V_n V_{n+1}] / E[V_n^2]."""
        return self.v1v2 / self.v2


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates and standard errors of the continuum parameters."""

    scheme: Likelihood
    tau: float
    n: int
    eta_hat: float
    eta_se: float
    sigma2_hat: float
    sigma2_se: float
    temperature_hat: float
    temperature_se: float
    kappa_hat: float | None = None
    kappa_se: float | None = None
    lambda4_hat: float | None = None
    lambda4_se: float | None = None
    replicas: int = 1
    conjecture_check: bool = False
    diagnostic_only: tuple[str, ...] = field(default_factory=tuple)

    CSV_COLUMNS: ClassVar[tuple[str, ...]] = (
        "scheme",
        "tau",
        "n",
        "replicas",
        "eta_hat",
        "eta_se",
        "kappa_hat",
        "kappa_se",
        "lambda4_hat",
        "lambda4_se",
        "sigma2_hat",
        "sigma2_se",
        "temperature_hat",
        "temperature_se",
        "conjecture_check",
        "diagnostic_only",
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Likelihood(self.scheme))
        if self.sigma2_hat < 0:
            raise InvalidParameterError(f"sigma2_hat must be non-negative, got {self.sigma2_hat}")

    def to_dict(self) -> dict[str, Any]:
        row: dict[str, Any] = {name: getattr(self, name) for name in self.CSV_COLUMNS}
        row["scheme"] = str(self.scheme)
        row["diagnostic_only"] = list(self.diagnostic_only)
        return row

    def to_row(self) -> dict[str, Any]:
        """Flat row for one-line CSV aggregation; absent estimates become empty cells."""
        row = self.to_dict()
        row["diagnostic_only"] = ";".join(self.diagnostic_only)
        row["conjecture_check"] = int(self.conjecture_check)
        return {k: ("" if v is None else v) for k, v in row.items()}


@dataclass(frozen=True, eq=False)
class Arma21Fit:
    """Maximum-likelihood ARMA(2,1) fit with observed-information standard errors.

    stderr and covariance follow the (psi, theta, alpha, beta) order; covariance is the 4x4
    asymptotic covariance.
    """

    params: Arma21Params
    stderr: NDArray[np.float64]
    loglik: float
    n_used: int
    iterations: int
    tau: float
    covariance: NDArray[np.float64] = field(repr=False, default_factory=lambda: np.zeros((4, 4)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "stderr": dict(zip(self.params.to_dict(), self.stderr.tolist(), strict=True)),
            "loglik": self.loglik,
            "n_used": self.n_used,
            "iterations": self.iterations,
            "tau": self.tau,
        }
