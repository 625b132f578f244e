"""Exact and approximate discretizations of partially observed 2D linear SDEs.

The state y = (x, v) follows dy = A y dt + B dW with A = [[-lambda, 1], [-kappa, -eta]]. Sampled
every tau, y_{n+1} = F y_n + w_n with F = e^{A tau} and w_n ~ N(0, Sigma(tau)). By Cayley-Hamilton
the observed coordinate obeys

    x_{n+1} = tr(F) x_n - det(F) x_{n-1} + w_{x,n} - F_22 w_{x,n-1} + F_12 w_{v,n-1}

which is ARMA(2,1) with psi = tr F, theta = -det F and a lag-1 correlated increment.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, linalg, signal

from .arma import increment_covariance, replica_rng
from .const import (
    DEG_TOL,
    QUAD_EPSABS,
    QUAD_EPSREL,
    QUAD_LIMIT,
    SAMPLING_NODE_TOL,
    FixedPointClass,
    Scheme,
)
from .decimation import ma_from_covariance
from .exceptions import DegenerateSamplingError, InvalidParameterError
from .models import (
    Arma21Params,
    ArmaModel,
    FixedPointSpec,
    IncrementCovariance,
    LinearSde2D,
    TimeSeries,
)

_LOGGER = logging.getLogger(__name__)

# Closed-form covariance integrals are used when |lambda_1 - lambda_2| * tau exceeds this
CLOSED_FORM_SEPARATION = 0.1


def _split(matrix: NDArray[np.float64]) -> tuple[float, float, NDArray[np.float64]]:
    """Half-trace m, discriminant delta = m^2 - det and traceless part N = A - m I."""
    m = 0.5 * float(np.trace(matrix))
    delta = m * m - float(np.linalg.det(matrix))
    return m, delta, matrix - m * np.eye(2)


def _cosh_sinhc(delta: float, t: float) -> tuple[float, float]:
    """cosh(sqrt(delta) t) and sinh(sqrt(delta) t)/sqrt(delta), continued to delta <= 0."""
    if 2.0 * math.sqrt(abs(delta)) < DEG_TOL:
        x = delta * t * t
        return 1.0 + x / 2.0 + x * x / 24.0, t * (1.0 + x / 6.0 + x * x / 120.0)
    if delta > 0:
        k = math.sqrt(delta)
        return math.cosh(k * t), math.sinh(k * t) / k
    w = math.sqrt(-delta)
    return math.cos(w * t), math.sin(w * t) / w


def _expm(matrix: NDArray[np.float64], t: float) -> NDArray[np.float64]:
    m, delta, traceless = _split(matrix)
    c, sh = _cosh_sinhc(delta, t)
    return math.exp(m * t) * (c * np.eye(2) + sh * traceless)


def mat_exp_2x2(sde: LinearSde2D, t: float) -> NDArray[np.float64]:
    """e^{A t} in real closed form, confluent near repeated eigenvalues.

    Since N = A - (tr A / 2) I squares to delta I, e^{At} = e^{mt} (cosh(kt) I + sinh(kt)/k N)
    with k = sqrt(delta), read as cos/sin for complex eigenvalues.
    """
    if t < 0:
        raise InvalidParameterError(f"t must be non-negative, got {t}")
    return _expm(sde.drift, t)


def _expm1_ratio(a: float, tau: float) -> float:
    """Integral of e^{a s} over [0, tau]."""
    x = a * tau
    return tau if x == 0 else tau * math.expm1(x) / x


def _closed_integrals(m: float, delta: float, tau: float) -> tuple[float, float, float]:
    """Integrals of e^{2ms} c^2, e^{2ms} c sh and e^{2ms} sh^2 over [0, tau] in closed form."""
    base = _expm1_ratio(2.0 * m, tau)
    if delta > 0:
        k = math.sqrt(delta)
        up, down = _expm1_ratio(2.0 * (m + k), tau), _expm1_ratio(2.0 * (m - k), tau)
        hyper = 0.5 * (up + down)
        return 0.5 * (base + hyper), (up - down) / (4.0 * k), (hyper - base) / (2.0 * k * k)
    w = math.sqrt(-delta)
    a, b = 2.0 * m, 2.0 * w
    growth = math.exp(a * tau)
    norm = a * a + b * b
    cos_part = (growth * (a * math.cos(b * tau) + b * math.sin(b * tau)) - a) / norm
    sin_part = (growth * (a * math.sin(b * tau) - b * math.cos(b * tau)) + b) / norm
    return 0.5 * (base + cos_part), sin_part / (2.0 * w), (base - cos_part) / (2.0 * w * w)


def _quad_integrals(m: float, delta: float, tau: float) -> tuple[float, float, float]:
    """The same three integrals by adaptive Gauss-Kronrod quadrature."""

    def make(power_c: int, power_s: int) -> Callable[[float], float]:
        def integrand(s: float) -> float:
            c, sh = _cosh_sinhc(delta, s)
            return math.exp(2.0 * m * s) * c**power_c * sh**power_s

        return integrand

    out = []
    for order, (pc, ps) in enumerate(((2, 0), (1, 1), (0, 2)), start=1):
        value, _ = integrate.quad(
            make(pc, ps),
            0.0,
            tau,
            epsabs=QUAD_EPSABS * tau**order,
            epsrel=QUAD_EPSREL,
            limit=QUAD_LIMIT,
        )
        out.append(value)
    return out[0], out[1], out[2]


def _covariance(
    drift: NDArray[np.float64], diffusion: NDArray[np.float64], tau: float, method: str
) -> NDArray[np.float64]:
    m, delta, traceless = _split(drift)
    gap_tau = 2.0 * math.sqrt(abs(delta)) * tau
    if method in ("auto", "closed") and gap_tau < CLOSED_FORM_SEPARATION:
        _LOGGER.debug("Eigenvalue gap times tau is %.3g, using quadrature", gap_tau)
        method = "quad"
    elif method == "auto":
        method = "closed"
    if method == "closed":
        i1, i2, i3 = _closed_integrals(m, delta, tau)
    elif method == "quad":
        i1, i2, i3 = _quad_integrals(m, delta, tau)
    else:
        raise InvalidParameterError(f"unknown covariance method {method!r}")
    nd = traceless @ diffusion
    sigma = i1 * diffusion + i2 * (nd + nd.T) + i3 * nd @ traceless.T
    return 0.5 * (sigma + sigma.T)


def transition_covariance(
    sde: LinearSde2D, tau: float, method: str = "auto"
) -> NDArray[np.float64]:
    """Sigma(tau) = integral_0^tau e^{As} BB^T e^{A^T s} ds.

    method is "closed" (eigen-decomposition integrals), "quad" (adaptive quadrature) or "auto".
    Both "closed" and "auto" integrate by quadrature while the eigenvalue gap times tau is below
    CLOSED_FORM_SEPARATION.
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    return _covariance(sde.drift, sde.diffusion, tau, method)


def stationary_covariance(sde: LinearSde2D) -> NDArray[np.float64]:
    """Stationary covariance of y, solving A S + S A^T = -BB^T."""
    if not sde.is_stable(strict=True):
        raise InvalidParameterError("stationary covariance needs a strictly stable drift")
    cov = linalg.solve_continuous_lyapunov(sde.drift, -sde.diffusion)
    return 0.5 * (cov + cov.T)


def _increment_moments(
    transition: NDArray[np.float64], sigma: NDArray[np.float64]
) -> tuple[float, float]:
    """alpha, beta of r_{n+1} = w_{x,n} - F_22 w_{x,n-1} + F_12 w_{v,n-1} with Cov(w) = sigma."""
    h = np.array([-transition[1, 1], transition[0, 1]])
    sh = sigma @ h
    return float(sigma[0, 0] + h @ sh), float(sh[0])


def exact_arma_params(sde: LinearSde2D, tau: float, method: str = "auto") -> Arma21Params:
    """ARMA(2,1) parameters of x sampled exactly every tau.

    Raises:
        DegenerateSamplingError: If (e^{A tau})_12 vanishes (tau at an oscillation node).
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    transition = mat_exp_2x2(sde, tau)
    if abs(transition[0, 1]) <= SAMPLING_NODE_TOL * max(1.0, float(np.abs(transition).max())):
        raise DegenerateSamplingError(f"(e^(A tau))_12 vanishes at tau={tau}")
    doubled = mat_exp_2x2(sde, 2.0 * tau)
    psi = doubled[0, 1] / transition[0, 1]
    theta = doubled[0, 0] - psi * transition[0, 0]
    alpha, beta = _increment_moments(transition, transition_covariance(sde, tau, method))
    return Arma21Params(float(psi), float(theta), alpha, beta)


def small_tau_expansion(sde: LinearSde2D, tau: float) -> Arma21Params:
    """Third-order expansion of the exact parameters in tau."""
    lam, kappa, eta = sde.lam, sde.kappa, sde.eta
    sxx, sxv, svv = sde.sxx2, sde.sxv2, sde.svv2
    drag = eta + lam
    t2, t3 = tau * tau, tau**3
    psi = (
        2.0
        - drag * tau
        + 0.5 * t2 * (-2.0 * kappa + eta**2 + lam**2)
        + t3 * (3.0 * kappa * drag - eta**3 - lam**3) / 6.0
    )
    theta = -1.0 + drag * tau - drag**2 * t2 / 2.0 + drag**3 * t3 / 6.0
    noise = svv + 2.0 * eta * sxv
    alpha = (
        2.0 * sxx * tau
        - 2.0 * sxx * drag * t2
        + 2.0 / 3.0 * (noise + sxx * (-kappa + 3 * eta**2 + 3 * eta * lam + 2 * lam**2)) * t3
    )
    beta = (
        -sxx * tau
        + sxx * drag * t2
        + (noise + sxx * (2 * kappa - 3 * eta**2 - 6 * eta * lam - 4 * lam**2)) * t3 / 6.0
    )
    return Arma21Params(psi, theta, alpha, beta)


def continuum_to_fixed_point(sde: LinearSde2D) -> FixedPointSpec:
    """Class-D fixed-point parameters (u, z, s, b) reached by the discretized SDE."""
    lam, kappa, eta = sde.lam, sde.kappa, sde.eta
    b = (
        sde.svv2
        + 2.0 * eta * sde.sxv2
        + sde.sxx2 * (2.0 * kappa - 3.0 * eta**2 - 6.0 * eta * lam - 4.0 * lam**2)
    ) / 6.0
    return FixedPointSpec(
        FixedPointClass.D,
        u=-(lam + eta),
        z=-kappa + (eta**2 + lam**2) / 2.0,
        s=-sde.sxx2,
        b=b,
    )


def euler_discretize(sde: LinearSde2D, tau: float) -> ArmaModel:
    """ARMA model of x under the semi-implicit Euler scheme

        x_{n+1} = x_n + tau (-lambda x_n + v_n) + dW_x
        v_{n+1} = v_n + tau (-kappa x_{n+1} - eta v_n) + dW_v

    With no position noise this is the AR(2) with phi = (2 - eta tau - kappa tau^2, -1 + eta tau)
    (for lambda = 0) and mu = sigma_vv tau^(3/2); otherwise an ARMA(2,1).
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    lam, kappa, eta = sde.lam, sde.kappa, sde.eta
    transition = np.array(
        [
            [1.0 - lam * tau, tau],
            [-kappa * tau * (1.0 - lam * tau), 1.0 - eta * tau - kappa * tau * tau],
        ]
    )
    loading = np.array([[1.0, 0.0], [-kappa * tau, 1.0]])
    sigma = tau * loading @ sde.diffusion @ loading.T
    alpha, beta = _increment_moments(transition, sigma)
    phi = (float(np.trace(transition)), -float(np.linalg.det(transition)))
    if sde.sxx2 == 0 and sde.sxv2 == 0:
        return ArmaModel(phi=phi, nu=(), mu=math.sqrt(max(alpha, 0.0)))
    mu, nu = ma_from_covariance(IncrementCovariance((alpha, beta)))
    return ArmaModel(phi=phi, nu=nu, mu=mu)


def _psd_factor(cov: NDArray[np.float64]) -> NDArray[np.float64]:
    """L with L L^T = cov, tolerating a singular or slightly indefinite cov."""
    eigvals, eigvecs = np.linalg.eigh(cov)
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def simulate_exact(
    sde: LinearSde2D,
    tau: float,
    n: int,
    seed: int,
    x0: float = 0.0,
    v0: float = 0.0,
    stationary: bool = False,
    replica: int | None = None,
) -> TimeSeries:
    """Sample x_0..x_{n-1} from the exact Gaussian transition of the 2D SDE.

    With stationary=True the initial state is drawn from the stationary law (strictly stable
    drift only) and x0, v0 are ignored.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    transition = mat_exp_2x2(sde, tau)
    factor = _psd_factor(transition_covariance(sde, tau))
    rng = replica_rng(seed, replica)
    if stationary:
        start = _psd_factor(stationary_covariance(sde)) @ rng.standard_normal(2)
    else:
        start = np.array([x0, v0], dtype=float)

    x = np.empty(n)
    x[0] = start[0]
    if n == 1:
        return TimeSeries(tau=tau, values=x, seed=seed, scheme=Scheme.EXACT)
    noise = rng.standard_normal((n - 1, 2)) @ factor.T
    x[1] = transition[0] @ start + noise[0, 0]
    if n > 2:
        increments = noise[1:, 0] - transition[1, 1] * noise[:-1, 0]
        increments += transition[0, 1] * noise[:-1, 1]
        ar = np.array([1.0, -np.trace(transition), np.linalg.det(transition)])
        zi = signal.lfiltic([1.0], ar, y=[x[1], x[0]])
        x[2:], _ = signal.lfilter([1.0], ar, increments, zi=zi)
    return TimeSeries(tau=tau, values=x, seed=seed, scheme=Scheme.EXACT)


def exact_to_sde(params: Arma21Params, tau: float) -> LinearSde2D:
    """Invert exact ARMA(2,1) parameters to the representative SDE with lambda = 0, sxv2 = 0.

    The observed law only fixes lambda + eta, kappa + lambda eta and two noise combinations, so
    the inversion picks the gauge with no position drag and uncorrelated noises. The lowest
    oscillation frequency is chosen when psi is compatible with several. A slightly negative
    position noise (estimation error) is clipped to zero.

    Raises:
        InvalidParameterError: If theta >= 0 or psi is out of reach of any linear SDE.
    """
    if params.theta >= 0:
        raise InvalidParameterError(f"theta must be negative, got {params.theta}")
    eta = -math.log(-params.theta) / tau
    ratio = params.psi / (2.0 * math.sqrt(-params.theta))
    if ratio >= 1.0:
        delta = (math.acosh(ratio) / tau) ** 2
    elif ratio >= -1.0:
        delta = -((math.acos(ratio) / tau) ** 2)
    else:
        raise InvalidParameterError(f"psi={params.psi} is not reachable from a linear SDE")
    kappa = eta * eta / 4.0 - delta

    drift = np.array([[0.0, 1.0], [-kappa, -eta]])
    transition = _expm(drift, tau)
    moments = []
    for diffusion in (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])):
        moments.append(_increment_moments(transition, _covariance(drift, diffusion, tau, "auto")))
    system = np.array([[moments[0][0], moments[1][0]], [moments[0][1], moments[1][1]]])
    sxx2, svv2 = np.linalg.solve(system, [params.alpha, params.beta])
    if sxx2 < 0:
        _LOGGER.debug("Clipping negative position noise %g to zero", sxx2)
        sxx2 = 0.0
    return LinearSde2D(lam=0.0, kappa=kappa, eta=eta, sxx2=float(sxx2), svv2=max(float(svv2), 0.0))


def gauge_partner(sde: LinearSde2D, lam: float, sxv2: float = 0.0) -> LinearSde2D:
    """Another SDE with position drag lam and the same observable law (same exact parameters).

    Raises:
        InvalidParameterError: If the partner would need a negative velocity noise.
    """
    eta = sde.lam + sde.eta - lam
    kappa = sde.kappa + sde.lam * sde.eta - lam * eta
    # sxx eta^2 + 2 eta sxv + svv is invariant along with sxx, lambda + eta and kappa + lambda eta
    level = sde.sxx2 * sde.eta**2 + 2.0 * sde.eta * sde.sxv2 + sde.svv2
    svv2 = level - sde.sxx2 * eta**2 - 2.0 * eta * sxv2
    return LinearSde2D(lam=lam, kappa=kappa, eta=eta, sxx2=sde.sxx2, sxv2=sxv2, svv2=svv2)


def compare_discretizations(sde: LinearSde2D, taus: Iterable[float]) -> list[dict[str, Any]]:
    """Exact versus Euler (psi, theta, alpha, beta) per sampling interval."""
    rows = []
    for tau in taus:
        exact = exact_arma_params(sde, tau)
        euler = euler_discretize(sde, tau)
        cov = increment_covariance(euler)
        rows.append(
            {
                "tau": tau,
                "psi_exact": exact.psi,
                "psi_euler": euler.phi[0],
                "theta_exact": exact.theta,
                "theta_euler": euler.phi[1],
                "alpha_exact": exact.alpha,
                "alpha_euler": cov.alpha,
                "beta_exact": exact.beta,
                "beta_euler": cov.beta,
            }
        )
    return rows
