"""Compiled sequential loops: the ARMA(2,1) prediction-error filter and nonlinear Euler steps."""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from numpy.typing import NDArray

_LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True, nogil=True)
def arma21_nll(
    x: NDArray[np.float64], psi: float, theta: float, sigma2: float, c: float
) -> float:  # pragma: no cover - compiled
    """Negative log-likelihood of x_2..x_{N-1} given x_0, x_1 under an ARMA(2,1) model.

    Model: x_{t+1} = psi x_t + theta x_{t-1} + e_{t+1} + c e_t with e ~ N(0, sigma2). The state
    (x_t, theta x_{t-1} + c e_t) has a known first coordinate, so the filter reduces to the
    mean m and variance p of the second coordinate.
    """
    m = theta * x[0]
    p = c * c * sigma2
    total = 0.0
    for t in range(1, x.shape[0] - 1):
        f = p + sigma2
        if not f > 0.0:
            return np.inf
        v = x[t + 1] - psi * x[t] - m
        total += 0.5 * (_LOG_2PI + math.log(f) + v * v / f)
        m = theta * x[t] + sigma2 * c * v / f
        p = sigma2 * c * c * (1.0 - sigma2 / f)
    return total


@njit(cache=True, nogil=True)
def quartic_euler_chunk(
    x: float,
    v: float,
    eta: float,
    kappa: float,
    lambda4: float,
    tau: float,
    kicks: NDArray[np.float64],
    subsample: int,
    out: NDArray[np.float64],
) -> tuple[float, float]:  # pragma: no cover - compiled
    """Advance dx = v dt, dv = (-eta v - kappa x - lambda4 x^3) dt + kick per fine step.

    Writes x after every `subsample` fine steps into out; kicks holds the pre-scaled velocity
    noise, one per fine step. Returns the final (x, v).
    """
    k = 0
    for i in range(out.shape[0]):
        for _ in range(subsample):
            x = x + tau * v
            v = v + tau * (-eta * v - kappa * x - lambda4 * x * x * x) + kicks[k]
            k += 1
        out[i] = x
    return x, v
