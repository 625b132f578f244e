"""Decimation: coarse-graining ARMA processes by dropping every other time point.

An ARMA(p,q) process observed at even times only is again ARMA on the doubled step. Multiplying
the update equation by Phi(-L) = 1 + sum (-1)^(i+1) phi_i L^i cancels all odd lags:

    Phi(L) Phi(-L) X_n = Phi(-L) Theta(L) eps_n

so the coarse AR coefficients are read off the even powers of Phi(z) Phi(-z), and the coarse
noise is the combination Phi(-L) Theta(L) eps_n, whose covariance at even lags is exact and
vanishes beyond lag floor((p+q)/2).
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from .arma import increment_covariance
from .const import FACTOR_MAX_ORDER, FACTOR_START, FACTOR_TOL
from .exceptions import FactorizationError, InvalidCovarianceError, InvalidParameterError
from .models import Arma21Params, ArmaModel, IncrementCovariance

_LOGGER = logging.getLogger(__name__)


def q_rule(p: int, q: int) -> int:
    """MA order after one decimation: floor((p+q)/2)."""
    if p < 0 or q < 0:
        raise InvalidParameterError(f"orders must be non-negative, got p={p}, q={q}")
    return (p + q) // 2


def decimate_arma21(params: Arma21Params) -> Arma21Params:
    """One decimation step of an ARMA(2,1) process in (psi, theta, alpha, beta) form.

    params is PSD by construction and so is the coarse result.
    """
    psi, theta, alpha, beta = params.psi, params.theta, params.alpha, params.beta
    cross = psi * (1.0 - theta)
    return Arma21Params(
        psi=psi * psi + 2.0 * theta,
        theta=-theta * theta,
        alpha=(1.0 + psi * psi + theta * theta) * alpha + 2.0 * cross * beta,
        beta=cross * beta - theta * alpha,
    )


def _innovation_row(factor: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    """theta_{n,1..q} from the banded lower Cholesky factor L = C V^(1/2) of the Toeplitz matrix."""
    q = factor.shape[0] - 1
    lags = np.arange(1, q + 1)
    return factor[lags, n - lags] / factor[0, n - lags]


def _innovations(gamma: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
    """Innovations algorithm for a banded MA(q) autocovariance.

    The innovations recursion is the Cholesky factorization of the Toeplitz covariance matrix,
    done here in banded form on growing orders until the last rows settle. Returns the limiting
    one-step prediction variance v and coefficients theta_1..theta_q of the minimum-phase
    representation.
    """
    q = gamma.size - 1
    size = min(FACTOR_START * (q + 1), FACTOR_MAX_ORDER)
    while True:
        band = np.repeat(gamma[:, np.newaxis], size, axis=1)
        try:
            factor = linalg.cholesky_banded(band, lower=True)
        except linalg.LinAlgError as err:
            raise FactorizationError(f"Toeplitz covariance of order {size}: {err}") from err
        v = factor[0] ** 2
        last, previous = _innovation_row(factor, size - 1), _innovation_row(factor, size - 2)
        change = float(np.max(np.abs(last - previous))) + abs(v[-1] - v[-2]) / gamma[0]
        if change < FACTOR_TOL:
            _LOGGER.debug("Innovations converged at order %d", size)
            return float(v[-1]), last
        if size >= FACTOR_MAX_ORDER:
            raise FactorizationError(
                f"innovations algorithm did not converge within order {FACTOR_MAX_ORDER}"
            )
        size = min(2 * size, FACTOR_MAX_ORDER)


def ma_from_covariance(cov: IncrementCovariance) -> tuple[float, tuple[float, ...]]:
    """Minimum-phase MA factor (mu, nu_1..nu_q) with increment_covariance equal to cov.

    Raises:
        FactorizationError: If the general-q factorization does not converge.
    """
    gamma = np.asarray(cov.gamma, dtype=float)
    if cov.q == 0:
        return math.sqrt(gamma[0]), ()
    if gamma[0] == 0:
        return 0.0, (0.0,) * cov.q
    if cov.q == 1:
        alpha, beta = gamma
        disc = math.sqrt(max(alpha * alpha - 4.0 * beta * beta, 0.0))
        mu = math.sqrt((alpha + disc) / 2.0)
        return mu, (beta / mu,)
    v, thetas = _innovations(gamma)
    mu = math.sqrt(v)
    return mu, tuple(float(t) * mu for t in thetas)


def _alternating(phi: NDArray[np.float64]) -> NDArray[np.float64]:
    """Coefficients of Phi(-L) = 1 + phi_1 L - phi_2 L^2 + phi_3 L^3 - ..."""
    signs = np.where(np.arange(1, phi.size + 1) % 2 == 1, 1.0, -1.0)
    return np.concatenate(([1.0], signs * phi))


def coarse_ar(phi: ArrayLike) -> tuple[float, ...]:
    """Coarse AR coefficients in closed form (phi_j = 0 for j > p).

    phi~_m = 2 phi_{2m} + (-1)^(m+1) phi_m^2 + 2 sum_{i=1}^{m-1} (-1)^(i+1) phi_i phi_{2m-i}
    """
    coeffs = np.asarray(phi, dtype=float)
    p = coeffs.size

    def f(j: int) -> float:
        return float(coeffs[j - 1]) if 1 <= j <= p else 0.0

    out = []
    for m in range(1, p + 1):
        cross = sum((-1) ** (i + 1) * f(i) * f(2 * m - i) for i in range(1, m))
        out.append(2.0 * f(2 * m) + (-1) ** (m + 1) * f(m) ** 2 + 2.0 * cross)
    return tuple(out)


def coarse_ar_piecewise(phi: ArrayLike) -> tuple[float, ...]:
    """Piecewise closed form with the odd/even split at index floor(p/2).

    Only reliable for p <= 2: from p = 3 on it drops the cross terms phi_i phi_{2m-i} with
    1 < i < m and 2m - i <= p (see coarse_ar for the complete expression).
    """
    coeffs = np.asarray(phi, dtype=float)
    p = coeffs.size
    half = p // 2

    def f(j: int) -> float:
        return float(coeffs[j - 1]) if 1 <= j <= p else 0.0

    def alternating_sum(upper: int) -> float:
        return sum((-1) ** (k + 1) * f(k) for k in range(1, upper + 1))

    out = []
    for i in range(1, p + 1):
        if i == half:
            value = 2.0 * f(2 * half) + (-1) ** (1 + half) * f(half) ** 2
            if p % 2 == 0:
                value += 2.0 * f(2 * half - 1) * alternating_sum((p - 1) // 2)
        elif i == 1:
            value = 2.0 * f(2) + f(1) ** 2
        elif i < half:
            value = 2.0 * f(2 * i) + (-1) ** (i + 1) * f(i) ** 2
            value += 2.0 * f(2 * i - 1) * alternating_sum(i - 1)
        else:
            value = (-1) ** (i + 1) * f(i) ** 2
        out.append(value)
    return tuple(out)


def coarse_ar_polynomial(phi: ArrayLike) -> tuple[float, ...]:
    """Coarse AR coefficients by expanding Phi(z) Phi(-z) and reading the even powers."""
    coeffs = np.asarray(phi, dtype=float)
    product = np.convolve(np.concatenate(([1.0], -coeffs)), _alternating(coeffs))
    return tuple(float(-product[2 * m]) for m in range(1, coeffs.size + 1))


def coarse_increment_covariance(model: ArmaModel) -> NDArray[np.float64]:
    """Covariance gamma~_0..gamma~_{p+q} of the coarse increment Phi(-L) Theta(L) eps_n.

    Only the first floor((p+q)/2) + 1 entries can be non-zero.
    """
    weights = np.convolve(_alternating(np.asarray(model.phi, dtype=float)), model.ma_polynomial)
    acf = np.correlate(weights, weights, mode="full")[weights.size - 1 :]
    out = np.zeros(model.p + model.q + 1)
    even = acf[::2]
    out[: even.size] = even
    return out


def decimate_general(model: ArmaModel) -> ArmaModel:
    """Decimate an ARMA(p,q) model to ARMA(p, floor((p+q)/2)) on the doubled time step.

    With p = 0 this drops every other innovation of an MA model.

    Raises:
        FactorizationError: If the coarse MA factorization fails.
    """
    q_coarse = q_rule(model.p, model.q)
    gamma = coarse_increment_covariance(model)[: q_coarse + 1]
    try:
        mu, nu = ma_from_covariance(IncrementCovariance(tuple(gamma)))
    except InvalidCovarianceError as err:
        raise FactorizationError(f"coarse increment covariance is not factorable: {err}") from err
    coarse = ArmaModel(phi=coarse_ar(model.phi), nu=nu, mu=mu)
    _LOGGER.debug("Decimated ARMA(%d,%d) -> ARMA(%d,%d)", model.p, model.q, coarse.p, coarse.q)
    return coarse


def decimate_times(model: ArmaModel, times: int) -> ArmaModel:
    """Apply decimate_general `times` times (coarse-grain by 2**times)."""
    if times < 0:
        raise InvalidParameterError(f"times must be non-negative, got {times}")
    for _ in range(times):
        model = decimate_general(model)
    return model


def params_from_model(model: ArmaModel) -> Arma21Params:
    """(psi, theta, alpha, beta) of a model with p <= 2 and q <= 1."""
    if model.p > 2 or model.q > 1:
        raise InvalidParameterError(f"ARMA({model.p},{model.q}) is not an ARMA(2,1) model")
    phi = (*model.phi, 0.0, 0.0)
    cov = increment_covariance(model)
    return Arma21Params(psi=phi[0], theta=phi[1], alpha=cov.alpha, beta=cov.beta)


def model_from_params(params: Arma21Params) -> ArmaModel:
    """ARMA(2,1) model whose increment covariance is (alpha, beta)."""
    mu, nu = ma_from_covariance(IncrementCovariance((params.alpha, params.beta)))
    return ArmaModel(phi=(params.psi, params.theta), nu=nu, mu=mu)
