"""RG map on truncated Taylor-coefficient space, fixed points and orbit classification.

A parameter set (psi, theta, alpha, beta) is written as power series in the sampling interval,
psi(tau) = sum_k psi_k tau^k. One RG step decimates (doubling tau) and rescales coefficient k by
2^-k so the result is again a series in the original tau. Products of truncated series are
closed order by order, so truncating at K loses nothing below K.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from .const import (
    BOUNDARY_TOL,
    CLASSIFY_MAX_ITER,
    CLASSIFY_STABLE_STEPS,
    CLASSIFY_TOL,
    DEFAULT_K,
    OVERFLOW_GUARD,
    TABULATED_K,
    TEMPLATE_TOL,
    FixedPointClass,
    Verdict,
)
from .exceptions import InvalidParameterError, UnsupportedOrderError
from .models import Classification, FixedPointSpec, RgOrbit, TaylorParams

_LOGGER = logging.getLogger(__name__)

# Order-0 AR values (psi_0, theta_0) of each fixed-point class
_ORDER0 = {
    FixedPointClass.A: (0.0, 0.0),
    FixedPointClass.B: (1.0, 0.0),
    FixedPointClass.C: (-1.0, -1.0),
    FixedPointClass.D: (2.0, -1.0),
}


def _mul(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """Product of two truncated series, truncated to the same order."""
    return np.convolve(a, b)[: a.size]


def rg_step(tp: TaylorParams) -> TaylorParams:
    """Decimate the series parameters once and rescale coefficient k by 2^-k."""
    one = np.zeros(tp.K + 1)
    one[0] = 1.0
    psi2 = _mul(tp.psi, tp.psi)
    theta2 = _mul(tp.theta, tp.theta)
    cross = _mul(tp.psi, one - tp.theta)
    coarse = np.vstack(
        [
            psi2 + 2.0 * tp.theta,
            -theta2,
            _mul(one + psi2 + theta2, tp.alpha) + 2.0 * _mul(cross, tp.beta),
            _mul(cross, tp.beta) - _mul(tp.theta, tp.alpha),
        ]
    )
    return TaylorParams.from_stack(coarse * 2.0 ** -np.arange(tp.K + 1))


def _diverged(tp: TaylorParams) -> bool:
    stack = tp.stack()
    return not np.all(np.isfinite(stack)) or float(np.max(np.abs(stack))) > OVERFLOW_GUARD


def flow(tp: TaylorParams, iterations: int) -> RgOrbit:
    """Orbit tp, rg_step(tp), ... with `iterations` steps (iterations + 1 points).

    Stops at the first iterate with a coefficient above OVERFLOW_GUARD and marks the orbit
    divergent.
    """
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be at least 1, got {iterations}")
    points = [tp]
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, iterations + 1):
            points.append(rg_step(points[-1]))
            if _diverged(points[-1]):
                _LOGGER.debug("Orbit diverged at step %d", step)
                return RgOrbit(tuple(points), divergent=True)
    return RgOrbit(tuple(points))


def inertial_step(alpha3: float, beta3: float) -> tuple[float, float]:
    """Third-order noise recursion at the D point: alpha' = (6a + 8b)/8, beta' = (a + 4b)/8."""
    return (6.0 * alpha3 + 8.0 * beta3) / 8.0, (alpha3 + 4.0 * beta3) / 8.0


def inertial_flow_closed_form(
    alpha3_0: float, beta3_0: float, steps: float
) -> tuple[float, float]:
    """(alpha_3, beta_3) after `steps` inertial steps; math.inf gives the limit.

    The step matrix has eigenvalues 1 (eigenvector (4, 1)) and 1/4 (eigenvector (2, -1)).
    """
    if steps < 0:
        raise InvalidParameterError(f"steps must be non-negative, got {steps}")
    decay = 0.0 if math.isinf(steps) else 4.0 ** (-steps)
    fixed = alpha3_0 + 2.0 * beta3_0
    transient = alpha3_0 - 4.0 * beta3_0
    return (
        2.0 * fixed / 3.0 + decay * transient / 3.0,
        fixed / 6.0 - decay * transient / 6.0,
    )


def make_fixed_point(spec: FixedPointSpec, K: int = DEFAULT_K) -> TaylorParams:  # noqa: N803
    """Series coefficients of the fixed point described by spec, to order K.

    Classes A and B are known in closed form at every order; C and D only through order 3.

    Raises:
        UnsupportedOrderError: If K > 3 for class C or D.
    """
    if K < 0:
        raise InvalidParameterError(f"K must be non-negative, got {K}")
    u, s, z, b = spec.u, spec.s, spec.z, spec.b
    psi, theta, alpha, beta = (np.zeros(K + 1) for _ in range(4))

    if spec.kind is FixedPointClass.A:
        alpha[0] = s
    elif spec.kind is FixedPointClass.B:
        # psi = e^{u tau}, alpha = (s / 2u)(e^{2u tau} - 1)
        for k in range(K + 1):
            psi[k] = u**k / math.factorial(k)
            if k >= 1:
                alpha[k] = s * (2.0 * u) ** (k - 1) / math.factorial(k)
    else:
        if K > TABULATED_K:
            raise UnsupportedOrderError(
                f"class {spec.kind} fixed points are only tabulated through order {TABULATED_K}"
            )
        if spec.kind is FixedPointClass.C:
            table = (
                (-1.0, u, -(u**2) / 2.0, u**3 / 6.0),
                (-1.0, 2.0 * u, -2.0 * u**2, (2.0 * u) ** 3 / 6.0),
                (0.0, 4.0 * s, -8.0 * u * s, 32.0 * u**2 * s / 3.0),
                (0.0, s, -2.0 * u * s, 13.0 * u**2 * s / 6.0),
            )
        else:
            table = (
                (2.0, u, z, u * (6.0 * z - u**2) / 12.0),
                (-1.0, -u, -(u**2) / 2.0, -(u**3) / 6.0),
                (0.0, -2.0 * s, -2.0 * u * s, 4.0 * b - (2.0 * z + 3.0 * u**2) * s),
                (0.0, s, u * s, b),
            )
        for target, row in zip((psi, theta, alpha, beta), table, strict=True):
            target[:] = row[: K + 1]
    return TaylorParams(psi, theta, alpha, beta)


def euler_initial_condition(
    eta: float, kappa: float, sigma2: float, K: int = DEFAULT_K  # noqa: N803
) -> TaylorParams:
    """Series form of the Euler AR(2): psi = 2 - eta tau - kappa tau^2, theta = -1 + eta tau,
    alpha = sigma2 tau^3."""
    if K < 3:
        raise InvalidParameterError(f"the Euler initial condition needs K >= 3, got {K}")
    tp = TaylorParams.zeros(K)
    psi = tp.psi.copy()
    psi[:3] = (2.0, -eta, -kappa)
    theta = tp.theta.copy()
    theta[:2] = (-1.0, eta)
    alpha = tp.alpha.copy()
    alpha[3] = sigma2
    return TaylorParams(psi, theta, alpha, tp.beta)


def _on_triangle_edge(psi0: float, theta0: float) -> bool:
    """Whether (psi0, theta0) lies on the boundary of the basin |theta| < 1, |psi| < 1 - theta."""
    if not -1.0 - BOUNDARY_TOL <= theta0 <= 1.0 + BOUNDARY_TOL:
        return False
    if abs(psi0) > 1.0 - theta0 + BOUNDARY_TOL:
        return False
    return (
        abs(theta0 + 1.0) <= BOUNDARY_TOL
        or abs(theta0 - 1.0) <= BOUNDARY_TOL
        or abs(abs(psi0) - (1.0 - theta0)) <= BOUNDARY_TOL
    )


def _nearest_class(tp: TaylorParams) -> FixedPointClass | None:
    point = (float(tp.psi[0]), float(tp.theta[0]))
    for kind, (psi0, theta0) in _ORDER0.items():
        if math.hypot(point[0] - psi0, point[1] - theta0) < TEMPLATE_TOL:
            return kind
    return None


def _extract(kind: FixedPointClass, tp: TaylorParams) -> FixedPointSpec:
    """Read (u, s, z, b) from the designated coefficients of a limit point."""

    def coef(series: NDArray[np.float64], k: int) -> float:
        return float(series[k]) if k <= tp.K else 0.0

    if kind is FixedPointClass.A:
        return FixedPointSpec(kind, s=coef(tp.alpha, 0))
    u = coef(tp.psi, 1)
    if kind is FixedPointClass.B:
        return FixedPointSpec(kind, u=u, s=coef(tp.alpha, 1))
    if kind is FixedPointClass.C:
        return FixedPointSpec(kind, u=u, s=coef(tp.alpha, 1) / 4.0)
    return FixedPointSpec(
        kind, u=u, s=-coef(tp.alpha, 1) / 2.0, z=coef(tp.psi, 2), b=coef(tp.beta, 3)
    )


def _template_residual(tp: TaylorParams, spec: FixedPointSpec) -> float:
    order = tp.K
    if spec.kind in (FixedPointClass.C, FixedPointClass.D):
        order = min(order, TABULATED_K)
    template = make_fixed_point(spec, order).stack()
    current = tp.stack()[:, : order + 1]
    scale = max(1.0, float(np.max(np.abs(current))))
    return float(np.max(np.abs(current - template))) / scale


def classify(
    tp: TaylorParams, tol: float = CLASSIFY_TOL, max_iterations: int = CLASSIFY_MAX_ITER
) -> Classification:
    """Flow tp until it settles or diverges and match the limit against the fixed points.

    Order-0 points exactly on the basin triangle edge (other than the fixed points themselves)
    are reported unresolved.
    """
    psi0, theta0 = float(tp.psi[0]), float(tp.theta[0])
    if _on_triangle_edge(psi0, theta0) and _nearest_class(tp) is None:
        _LOGGER.debug("(%s, %s) lies on the basin boundary", psi0, theta0)
        return Classification(Verdict.UNRESOLVED, None, 0, math.nan, tp)

    current = tp
    stable = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for iteration in range(1, max_iterations + 1):
            nxt = rg_step(current)
            if _diverged(nxt):
                return Classification(Verdict.DIVERGENT, None, iteration, math.inf, nxt)
            stack = nxt.stack()
            change = float(np.max(np.abs(stack - current.stack())))
            change /= max(1.0, float(np.max(np.abs(stack))))
            current = nxt
            stable = stable + 1 if change < tol else 0
            if stable >= CLASSIFY_STABLE_STEPS:
                break
        else:
            _LOGGER.debug("Orbit did not settle within %d iterations", max_iterations)
            return Classification(Verdict.UNRESOLVED, None, max_iterations, math.nan, current)

    kind = _nearest_class(current)
    if kind is None:
        return Classification(Verdict.UNRESOLVED, None, iteration, math.inf, current)
    spec = _extract(kind, current)
    residual = _template_residual(current, spec)
    if residual >= TEMPLATE_TOL:
        return Classification(Verdict.UNRESOLVED, spec, iteration, residual, current)
    return Classification(Verdict(kind.value), spec, iteration, residual, current)


def basin_grid(
    psi_range: tuple[float, float] = (-2.5, 2.5),
    theta_range: tuple[float, float] = (-1.5, 1.5),
    resolution: int = 51,
    K: int = DEFAULT_K,  # noqa: N803
    alpha0: float = 1.0,
) -> list[tuple[float, float, Classification]]:
    """Classify a grid of order-0 AR points carrying white noise alpha0 at order 0."""
    if resolution < 2:
        raise InvalidParameterError(f"resolution must be at least 2, got {resolution}")
    results = []
    for theta0 in np.linspace(*theta_range, resolution):
        for psi0 in np.linspace(*psi_range, resolution):
            tp = TaylorParams.zeros(K).replace("psi", 0, psi0)
            tp = tp.replace("theta", 0, theta0).replace("alpha", 0, alpha0)
            results.append((float(psi0), float(theta0), classify(tp)))
    return results
