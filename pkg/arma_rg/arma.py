"""ARMA(p,q) models: construction, stationarity, seeded simulation and exact autocovariance."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, signal

from .const import BURN_IN_CAP, BURN_IN_FACTOR, RHO_TOL, Scheme
from .exceptions import InvalidParameterError, NonStationaryError
from .models import ArmaModel, IncrementCovariance, TimeSeries

_LOGGER = logging.getLogger(__name__)


def new_arma(phi: Sequence[float], nu: Sequence[float], mu: float) -> ArmaModel:
    """Build a validated ARMA(len(phi), len(nu)) model.

    Raises:
        InvalidParameterError: If mu is negative or a coefficient is not finite.
    """
    return ArmaModel(phi=tuple(phi), nu=tuple(nu), mu=mu)


def ar_roots(model: ArmaModel) -> NDArray[np.complex128]:
    """Roots of z^p - phi_1 z^(p-1) - ... - phi_p."""
    if model.p == 0:
        return np.empty(0, dtype=complex)
    return np.roots(np.concatenate(([1.0], -np.asarray(model.phi)))).astype(complex)


def _max_root_modulus(model: ArmaModel) -> float:
    roots = ar_roots(model)
    return float(np.max(np.abs(roots))) if roots.size else 0.0


def is_stationary(model: ArmaModel) -> bool:
    """True iff every AR root lies strictly inside the unit disk (margin RHO_TOL)."""
    return _max_root_modulus(model) < 1.0 - RHO_TOL


def default_burn_in(model: ArmaModel) -> int:
    """10x the slowest AR timescale, capped; zero for non-stationary models."""
    r = _max_root_modulus(model)
    if r >= 1.0 - RHO_TOL:
        return 0
    return min(BURN_IN_FACTOR * math.ceil(1.0 / (1.0 - r)), BURN_IN_CAP)


def replica_rng(seed: int, replica: int | None = None) -> np.random.Generator:
    """Seeded generator; each replica index gets an independent substream of the seed."""
    if replica is None:
        return np.random.default_rng(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replica,))))


def simulate(
    model: ArmaModel,
    n: int,
    tau: float,
    seed: int,
    burn_in: int | None = None,
    replica: int | None = None,
) -> TimeSeries:
    """Generate n observations from the update equation with i.i.d. standard-normal innovations.

    Non-stationary models start from X = 0 and take no burn-in. When burn_in is None, stationary
    models discard default_burn_in(model) leading values.

    Raises:
        InvalidParameterError: If n < 1 or burn_in < 0.
        NonStationaryError: If a positive burn-in is requested for a non-stationary model.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    stationary = is_stationary(model)
    if burn_in is None:
        burn_in = default_burn_in(model) if stationary else 0
    elif burn_in < 0:
        raise InvalidParameterError(f"burn_in must be non-negative, got {burn_in}")
    elif burn_in > 0 and not stationary:
        raise NonStationaryError("burn-in requires a stationary model; use burn_in=0")

    rng = replica_rng(seed, replica)
    eps = rng.standard_normal(n + burn_in)
    x = signal.lfilter(model.ma_polynomial, model.ar_polynomial, eps)
    _LOGGER.debug("Simulated ARMA(%d,%d): n=%d burn_in=%d", model.p, model.q, n, burn_in)
    return TimeSeries(tau=tau, values=x[burn_in:], seed=seed, scheme=Scheme.ARMA)


def _state_space(model: ArmaModel) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Transition T and noise loading R for s_n = (X_n..X_{n-p+1}, eps_n..eps_{n-q+1})."""
    p, q = model.p, model.q
    dim = p + q
    T = np.zeros((dim, dim))
    T[0, :p] = model.phi
    T[0, p:] = model.nu
    for i in range(1, p):
        T[i, i - 1] = 1.0
    for j in range(1, q):
        T[p + j, p + j - 1] = 1.0
    R = np.zeros(dim)
    R[0] = model.mu
    if q:
        R[p] = 1.0
    return T, R


def autocovariance(model: ArmaModel, max_lag: int) -> NDArray[np.float64]:
    """Exact stationary autocovariance gamma(0..max_lag).

    The stationary state covariance solves the discrete Lyapunov equation of the companion form;
    lags up to p+q come from propagating it, later lags from the AR recursion.

    Raises:
        NonStationaryError: If the model is not stationary.
    """
    if max_lag < 0:
        raise InvalidParameterError(f"max_lag must be non-negative, got {max_lag}")
    if not is_stationary(model):
        raise NonStationaryError(f"autocovariance needs a stationary model, phi={model.phi}")

    gamma = np.zeros(max_lag + 1)
    c = model.ma_polynomial
    if model.p == 0:
        ma = np.correlate(c, c, mode="full")[model.q :]
        k = min(model.q, max_lag) + 1
        gamma[:k] = ma[:k]
        return gamma

    T, R = _state_space(model)
    cov = linalg.solve_discrete_lyapunov(T, np.outer(R, R))
    direct = min(max_lag, model.p + model.q)
    for k in range(direct + 1):
        gamma[k] = cov[0, 0]
        cov = T @ cov
    phi = np.asarray(model.phi)
    for k in range(direct + 1, max_lag + 1):
        gamma[k] = float(phi @ gamma[k - model.p : k][::-1])
    return gamma


def increment_covariance(model: ArmaModel) -> IncrementCovariance:
    """gamma_k = sum_j c_j c_{j+k} with c = (mu, nu_1, ..., nu_q)."""
    c = model.ma_polynomial
    return IncrementCovariance(tuple(np.correlate(c, c, mode="full")[model.q :]))


def rotation_coordinates(phi: ArrayLike) -> tuple[NDArray[np.float64], float]:
    """Real Jordan frame of an AR(2) companion matrix with complex eigenvalues.

    Returns the matrix mapping (X_n, X_{n-1}) to coordinates in which one noiseless step is a
    rotation (times the eigenvalue modulus), and the signed rotation angle per step in those
    coordinates.

    Raises:
        InvalidParameterError: If phi is not of length 2 or the eigenvalues are real.
    """
    coeffs = np.asarray(phi, dtype=float)
    if coeffs.shape != (2,):
        raise InvalidParameterError("rotation coordinates need exactly two AR coefficients")
    companion = np.array([[coeffs[0], coeffs[1]], [1.0, 0.0]])
    eigvals, eigvecs = np.linalg.eig(companion)
    upper = int(np.argmax(eigvals.imag))
    if eigvals[upper].imag <= 0:
        raise InvalidParameterError(f"companion eigenvalues of {coeffs} are real")
    basis = np.column_stack([eigvecs[:, upper].real, eigvecs[:, upper].imag])
    # In this frame the step matrix is r [[cos w, sin w], [-sin w, cos w]]: angle -w per step
    return np.linalg.inv(basis), -float(np.angle(eigvals[upper]))
