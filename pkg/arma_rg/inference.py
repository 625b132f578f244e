"""Estimators for second-order processes observed at a finite sampling interval.

Three likelihoods are available. The Euler likelihood treats the data as the AR(2) of an Euler
step and is inconsistent for the damping (it converges to 2/3 of the true value). The exact
ARMA(2,1) likelihood is consistent. The effective AR(2) likelihood rescales the damping so that
reconstructed-velocity moments come out right.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, TypeVar

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from .arma import autocovariance, is_stationary, replica_rng
from .const import (
    EULER_DAMPING_FACTOR,
    HESSIAN_STEP,
    JACKKNIFE_BLOCKS,
    MIN_ARMA21_LENGTH,
    MIN_EULER_LENGTH,
    MLE_FATOL,
    MLE_MAX_ITER,
    MLE_RESTARTS,
    MLE_XATOL,
    QUARTIC_BURN_IN_TIME,
    QUARTIC_CHUNK,
    QUARTIC_STABILITY,
    RHO_TOL,
    SINGULAR_RTOL,
    Likelihood,
    Scheme,
)
from .exceptions import EstimationError, InvalidParameterError, NonStationaryError
from .kernels import arma21_nll, quartic_euler_chunk
from .models import Arma21Fit, Arma21Params, ArmaModel, EstimateReport, TimeSeries, VelocityStats
from .sde_exact import exact_to_sde

_LOGGER = logging.getLogger(__name__)

R = TypeVar("R")


def sample_autocovariance(series: TimeSeries, max_lag: int) -> list[float]:
    """Biased (1/N) autocovariance of the mean-removed series at lags 0..max_lag."""
    if max_lag < 0:
        raise InvalidParameterError(f"max_lag must be non-negative, got {max_lag}")
    if len(series) <= max_lag:
        raise InvalidParameterError(
            f"series of length {len(series)} is too short for max_lag={max_lag}"
        )
    y = series.values - series.values.mean()
    n = y.size
    return [float(y[: n - k] @ y[k:]) / n for k in range(max_lag + 1)]


def _block_jackknife(
    columns: NDArray[np.float64], statistic: Callable[[NDArray[np.float64]], NDArray[np.float64]]
) -> NDArray[np.float64]:
    """Delete-one-block jackknife standard errors of statistic(column means).

    columns has one row per sample. Returns inf when fewer than two blocks are available.
    """
    m = columns.shape[0]
    blocks = min(JACKKNIFE_BLOCKS, m)
    if blocks < 2:
        return np.full(np.shape(statistic(columns.mean(axis=0))), math.inf)
    edges = np.linspace(0, m, blocks + 1).astype(int)
    sums = np.add.reduceat(columns, edges[:-1], axis=0)
    counts = np.diff(edges)
    leave_out = (sums.sum(axis=0) - sums) / (m - counts)[:, None]
    estimates = np.array([statistic(row) for row in leave_out])
    spread = ((estimates - estimates.mean(axis=0)) ** 2).sum(axis=0)
    return np.sqrt((blocks - 1) / blocks * spread)


def _velocity_products(series: TimeSeries) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Reconstructed velocities and the aligned (V_n^2, V_n V_{n+1}) products."""
    if len(series) < 3:
        raise InvalidParameterError("reconstructed velocity statistics need at least 3 points")
    velocity = np.diff(series.values) / series.tau
    products = np.column_stack([velocity[:-1] ** 2, velocity[:-1] * velocity[1:]])
    return velocity, products


def reconstructed_velocity_stats(series: TimeSeries) -> VelocityStats:
    """E[V^2] and E[V_n V_{n+1}] of V_n = (X_{n+1} - X_n)/tau with block-jackknife errors."""
    velocity, products = _velocity_products(series)
    stderr2, stderr12 = _block_jackknife(products, lambda row: row)
    return VelocityStats(
        v2=float(np.mean(velocity**2)),
        v1v2=float(products[:, 1].mean()),
        n_used=int(velocity.size),
        stderr2=float(stderr2),
        stderr12=float(stderr12),
    )


def _temperature(
    eta: float, eta_se: float, sigma2: float, sigma2_se: float
) -> tuple[float, float]:
    """T = sigma2 / (2 eta) with a first-order delta-method error."""
    temperature = sigma2 / (2.0 * eta)
    relative = math.hypot(sigma2_se / sigma2, eta_se / eta)
    return temperature, abs(temperature) * relative


def euler_mle(
    series: TimeSeries, with_kappa: bool = True, with_cubic: bool = False
) -> EstimateReport:
    """Gaussian MLE of (eta, kappa, sigma2) under the Euler AR(2) likelihood.

    The discrete acceleration (X_{n+1} - 2X_n + X_{n-1})/tau^2 is regressed on the reconstructed
    velocity V_{n-1} and, optionally, on the position X_n and its cube X_n^3 (the force is
    evaluated where the semi-implicit Euler step evaluates it).

    Raises:
        InvalidParameterError: If the series has fewer than 10 points.
        EstimationError: If the regressors are collinear, the residual variance vanishes or the
            damping estimate is not positive.
    """
    x = series.values
    if x.size < MIN_EULER_LENGTH:
        raise InvalidParameterError(
            f"Euler MLE needs at least {MIN_EULER_LENGTH} points, got {x.size}"
        )
    tau = series.tau
    acceleration = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / tau**2
    columns = [(x[1:-1] - x[:-2]) / tau]
    if with_kappa:
        columns.append(x[1:-1])
    if with_cubic:
        columns.append(x[1:-1] ** 3)
    design = np.column_stack(columns)
    coef, _, rank, _ = np.linalg.lstsq(design, acceleration, rcond=None)
    if rank < design.shape[1]:
        raise EstimationError("Euler regressors are collinear (deterministic series?)")

    m, k = design.shape
    residual = acceleration - design @ coef
    rss = float(residual @ residual)
    if not rss > SINGULAR_RTOL * float(acceleration @ acceleration):
        raise EstimationError("Euler residual variance vanishes; the likelihood is singular")
    coef_cov = rss / (m - k) * np.linalg.inv(design.T @ design)
    coef_se = np.sqrt(np.diag(coef_cov))

    eta_hat, eta_se = -float(coef[0]), float(coef_se[0])
    if not eta_hat > 0:
        raise EstimationError(f"Euler damping estimate {eta_hat} is not positive")
    sigma2_hat = tau * rss / m
    sigma2_se = sigma2_hat * math.sqrt(2.0 / m)
    temperature, temperature_se = _temperature(eta_hat, eta_se, sigma2_hat, sigma2_se)

    extra: dict[str, float] = {}
    if with_kappa:
        extra.update(kappa_hat=-float(coef[1]), kappa_se=float(coef_se[1]))
    if with_cubic:
        extra.update(lambda4_hat=-float(coef[-1]), lambda4_se=float(coef_se[-1]))
    _LOGGER.debug("Euler MLE on %d points: eta=%.6g T=%.6g", x.size, eta_hat, temperature)
    return EstimateReport(
        scheme=Likelihood.EULER,
        tau=tau,
        n=int(x.size),
        eta_hat=eta_hat,
        eta_se=eta_se,
        sigma2_hat=sigma2_hat,
        sigma2_se=sigma2_se,
        temperature_hat=temperature,
        temperature_se=temperature_se,
        **extra,
    )


def _natural(w: NDArray[np.float64]) -> NDArray[np.float64]:
    """(psi, theta, log alpha, atanh(2 beta / alpha)) -> (psi, theta, alpha, beta)."""
    with np.errstate(over="ignore"):
        alpha = np.exp(w[2])
    return np.array([w[0], w[1], alpha, 0.5 * alpha * np.tanh(w[3])])


def _natural_jacobian(w: NDArray[np.float64]) -> NDArray[np.float64]:
    alpha = float(np.exp(w[2]))
    slope = float(np.tanh(w[3]))
    jac = np.eye(4)
    jac[2, 2] = alpha
    jac[3, 2] = 0.5 * alpha * slope
    jac[3, 3] = 0.5 * alpha * (1.0 - slope * slope)
    return jac


def _innovation_form(alpha: float, beta: float) -> tuple[float, float]:
    """sigma2 and c with sigma2 (1 + c^2) = alpha and sigma2 c = beta, |c| <= 1."""
    sigma2 = 0.5 * (alpha + math.sqrt(max(alpha * alpha - 4.0 * beta * beta, 0.0)))
    return sigma2, beta / sigma2


def _ar2_start(x: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Starting point and whitening matrix from the least-squares AR(2) fit.

    Returns w0 = (psi, theta, log s2, 0) and a lower-triangular scale L such that one unit of
    z in w = w0 + L z is roughly one standard error in every direction.
    """
    design = np.column_stack([x[1:-1], x[:-2]])
    target = x[2:]
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < 2:
        raise EstimationError("AR(2) regressors are collinear (deterministic series?)")
    residual = target - design @ coef
    m = target.size
    s2 = float(residual @ residual) / (m - 2)
    if not s2 > SINGULAR_RTOL * float(target @ target) / m:
        raise EstimationError("innovation variance vanishes; the likelihood is singular")

    scale = np.zeros((4, 4))
    scale[:2, :2] = np.linalg.cholesky(s2 * np.linalg.inv(design.T @ design))
    scale[2, 2] = math.sqrt(2.0 / m)
    scale[3, 3] = 1.0 / math.sqrt(m)
    return np.array([coef[0], coef[1], math.log(s2), 0.0]), scale


def _hessian(
    func: Callable[[NDArray[np.float64]], float], x: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Central differences of forward-difference gradients, symmetrized."""
    n = x.size
    hess = np.zeros((n, n))
    for i in range(n):
        step = np.zeros(n)
        step[i] = HESSIAN_STEP
        upper = optimize.approx_fprime(x + step, func, HESSIAN_STEP)
        lower = optimize.approx_fprime(x - step, func, HESSIAN_STEP)
        hess[i] = (upper - lower) / (2.0 * HESSIAN_STEP)
    return 0.5 * (hess + hess.T)


def arma21_mle(series: TimeSeries) -> Arma21Fit:
    """Exact Gaussian MLE of the ARMA(2,1) parameters (psi, theta, alpha, beta).

    The likelihood is the prediction-error decomposition of the innovations filter, conditional
    on the first two observations (valid for non-stationary parameter values too). The search is
    a Nelder-Mead simplex over (psi, theta, log alpha, atanh(2 beta / alpha)), which keeps
    alpha > 2|beta| interior, in coordinates whitened by the least-squares AR(2) fit. Standard
    errors come from the observed information, mapped back with the delta method.

    Raises:
        InvalidParameterError: If the series has fewer than 50 points.
        EstimationError: If the series is deterministic or the simplex does not converge; the
            error carries the best iterate.
    """
    x = np.ascontiguousarray(series.values)
    if x.size < MIN_ARMA21_LENGTH:
        raise InvalidParameterError(
            f"ARMA(2,1) MLE needs at least {MIN_ARMA21_LENGTH} points, got {x.size}"
        )
    start, scale = _ar2_start(x)
    n_terms = x.size - 2

    def total_nll(z: NDArray[np.float64]) -> float:
        psi, theta, alpha, beta = _natural(start + scale @ z)
        if not 0 < alpha < math.inf:
            return math.inf
        sigma2, c = _innovation_form(alpha, beta)
        return float(arma21_nll(x, psi, theta, sigma2, c))

    def objective(z: NDArray[np.float64]) -> float:
        return total_nll(z) / n_terms

    z = np.zeros(4)
    iterations = 0
    for attempt in range(MLE_RESTARTS + 1):
        result = optimize.minimize(
            objective,
            z,
            method="Nelder-Mead",
            options={
                "maxiter": MLE_MAX_ITER,
                "xatol": MLE_XATOL,
                "fatol": MLE_FATOL,
                "initial_simplex": np.vstack([z, z + np.eye(4)]),
            },
        )
        iterations += int(result.nit)
        z = result.x
        if result.success and math.isfinite(result.fun):
            break
        _LOGGER.warning("Nelder-Mead attempt %d stopped: %s", attempt + 1, result.message)
    else:
        best = Arma21Params.from_array(_natural(start + scale @ z))
        raise EstimationError(
            f"ARMA(2,1) likelihood search did not converge in {iterations} iterations",
            best_iterate=best,
        )

    w = start + scale @ z
    params = Arma21Params.from_array(_natural(w))
    info = _hessian(total_nll, z)
    if np.all(np.linalg.eigvalsh(info) > 0):
        cov_w = scale @ np.linalg.inv(info) @ scale.T
        jac = _natural_jacobian(w)
        covariance = jac @ cov_w @ jac.T
    else:
        _LOGGER.warning("Observed information is not positive definite; no standard errors")
        covariance = np.full((4, 4), math.nan)
    stderr = np.sqrt(np.abs(np.diag(covariance)))
    _LOGGER.debug("ARMA(2,1) MLE converged after %d iterations: %s", iterations, params)
    return Arma21Fit(
        params=params,
        stderr=stderr,
        loglik=-total_nll(z),
        n_used=n_terms,
        iterations=iterations,
        tau=series.tau,
        covariance=covariance,
    )


def _continuum_estimates(values: NDArray[np.float64], tau: float) -> NDArray[np.float64]:
    """(eta, kappa, sigma2, T) of the gauge representative of ARMA(2,1) parameters."""
    sde = exact_to_sde(Arma21Params.from_array(values), tau)
    return np.array([sde.eta, sde.kappa, sde.svv2, sde.svv2 / (2.0 * sde.eta)])


def arma21_to_report(fit: Arma21Fit) -> EstimateReport:
    """Map an ARMA(2,1) fit through the exact discretization to continuum estimates.

    Uses the gauge lambda = sxv2 = 0, so sigma2 is the velocity noise variance. Errors are
    propagated with a finite-difference Jacobian of the inverse map.

    Raises:
        EstimationError: If the implied damping is not positive.
    """
    values = fit.params.as_array()
    estimates = _continuum_estimates(values, fit.tau)
    if not estimates[0] > 0:
        raise EstimationError(f"fitted ARMA(2,1) implies non-positive damping {estimates[0]}")
    spread = fit.stderr
    steps = np.where(np.isfinite(spread) & (spread > 0), 1e-4 * spread, 1e-8)
    jac = optimize.approx_fprime(values, _continuum_estimates, steps, fit.tau)
    errors = np.sqrt(np.abs(np.diag(jac @ fit.covariance @ jac.T)))
    eta, kappa, sigma2, temperature = (float(v) for v in estimates)
    eta_se, kappa_se, sigma2_se, temperature_se = (float(v) for v in errors)
    return EstimateReport(
        scheme=Likelihood.ARMA21,
        tau=fit.tau,
        n=fit.n_used + 2,
        eta_hat=eta,
        eta_se=eta_se,
        sigma2_hat=sigma2,
        sigma2_se=sigma2_se,
        temperature_hat=temperature,
        temperature_se=temperature_se,
        kappa_hat=kappa,
        kappa_se=kappa_se,
    )


def effective_ar2(
    eta: float, T: float, tau: float, einstein: Literal["linear", "exact"] = "linear"  # noqa: N803
) -> ArmaModel:
    """AR(2) whose reconstructed velocities have the equilibrium moments of a damped particle.

    With a = (2/3) eta tau the velocity increment is the AR(1) V_{n+1} = (1 - a) V_n + noise, so
    phi = (2 - a, -(1 - a)). The noise variance follows the Einstein relation, linearized
    (mu^2 = 2 T a tau^2 = (4/3) T eta tau^3) or exact (mu^2 = T (1 - (1 - a)^2) tau^2), the
    latter making E[V^2] = T hold exactly.

    Raises:
        InvalidParameterError: If eta, T or tau is not positive or (2/3) eta tau >= 1.
    """
    if not (eta > 0 and T > 0 and tau > 0):
        raise InvalidParameterError(f"eta, T and tau must be positive, got {eta}, {T}, {tau}")
    a = EULER_DAMPING_FACTOR * eta * tau
    if not a < 1:
        raise InvalidParameterError(f"(2/3) eta tau must be below 1, got {a}")
    if einstein == "linear":
        mu2 = 2.0 * T * a * tau**2
    elif einstein == "exact":
        mu2 = T * (1.0 - (1.0 - a) ** 2) * tau**2
    else:
        raise InvalidParameterError(f"einstein must be 'linear' or 'exact', got {einstein!r}")
    return ArmaModel(phi=(2.0 - a, -(1.0 - a)), nu=(), mu=math.sqrt(mu2))


def velocity_moments(model: ArmaModel, tau: float) -> tuple[float, float]:
    """Analytic E[V^2] and E[V_n V_{n+1}] of V_n = (X_{n+1} - X_n)/tau for an ARMA model.

    An AR(2) with a unit root (phi_1 + phi_2 = 1) has stationary increments W_n = X_n - X_{n-1},
    which are ARMA(1,q) with AR coefficient -phi_2.

    Raises:
        NonStationaryError: If neither X nor its increments are stationary.
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau}")
    if model.p == 2 and abs(sum(model.phi) - 1.0) <= RHO_TOL:
        increments = ArmaModel(phi=(-model.phi[1],), nu=model.nu, mu=model.mu)
        if not is_stationary(increments):
            raise NonStationaryError(f"increments of phi={model.phi} are not stationary")
        gamma = autocovariance(increments, 1)
        return float(gamma[0]) / tau**2, float(gamma[1]) / tau**2
    gamma = autocovariance(model, 2)
    v2 = 2.0 * (gamma[0] - gamma[1]) / tau**2
    v1v2 = (2.0 * gamma[1] - gamma[0] - gamma[2]) / tau**2
    return float(v2), float(v1v2)


def effective_mle(series: TimeSeries) -> EstimateReport:
    """Estimates under the effective AR(2): eta = 3 (1 - rho) / (2 tau), T = E[V^2].

    rho is the lag-1 autocorrelation of the reconstructed velocity; sigma2 follows from the
    Einstein relation. Errors are block-jackknife.
    """
    tau = series.tau
    velocity, products = _velocity_products(series)

    def statistic(row: NDArray[np.float64]) -> NDArray[np.float64]:
        rho = row[1] / row[0]
        return np.array([(1.0 - rho) / (EULER_DAMPING_FACTOR * tau), row[0]])

    with np.errstate(divide="ignore", invalid="ignore"):
        eta_hat, temperature = (float(v) for v in statistic(products.mean(axis=0)))
        eta_se, temperature_se = (float(v) for v in _block_jackknife(products, statistic))
    if not (math.isfinite(eta_hat) and eta_hat > 0 and temperature > 0):
        raise EstimationError(
            f"effective AR(2) estimates are degenerate: eta={eta_hat}, T={temperature}"
        )
    sigma2 = 2.0 * eta_hat * temperature
    sigma2_se = sigma2 * math.hypot(eta_se / eta_hat, temperature_se / temperature)
    return EstimateReport(
        scheme=Likelihood.EFFECTIVE,
        tau=tau,
        n=len(series),
        eta_hat=eta_hat,
        eta_se=eta_se,
        sigma2_hat=sigma2,
        sigma2_se=sigma2_se,
        temperature_hat=temperature,
        temperature_se=temperature_se,
    )


def _quartic_reference_scale(kappa: float, lambda4: float, T: float) -> float:  # noqa: N803
    """Squared position scale x_ref^2 used for the stiffness bound and the starting point."""
    if kappa < 0:
        return max(T, -kappa / lambda4)
    return T


def quartic_experiment(
    eta: float,
    kappa: float,
    lambda4: float,
    T: float,  # noqa: N803
    tau_sim: float,
    subsample: int,
    n: int,
    seed: int,
    replica: int | None = None,
) -> EstimateReport:
    """Euler MLE on a Brownian particle in the potential kappa x^2/2 + lambda4 x^4/4.

    Simulates dx = v dt, dv = (-eta v - kappa x - lambda4 x^3) dt + sqrt(2 T eta) dW with a fine
    semi-implicit Euler step tau_sim, keeps every `subsample`-th position after a burn-in of
    10/eta time units, and fits the Euler likelihood with a cubic force. Only eta and T are
    expected to be consistent up to the 2/3 rescaling of eta; kappa and lambda4 are reported as
    diagnostics.

    Raises:
        InvalidParameterError: If the potential is not confining, tau_sim is too large for a
            stable fine step, or a count is out of range.
        EstimationError: If the simulated series is degenerate (T = 0).
    """
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    if T < 0:
        raise InvalidParameterError(f"T must be non-negative, got {T}")
    if subsample < 1:
        raise InvalidParameterError(f"subsample must be at least 1, got {subsample}")
    if n < MIN_EULER_LENGTH:
        raise InvalidParameterError(f"n must be at least {MIN_EULER_LENGTH}, got {n}")
    if lambda4 < 0 or (lambda4 == 0 and kappa <= 0):
        raise InvalidParameterError(
            f"potential with kappa={kappa}, lambda4={lambda4} does not confine the particle"
        )
    x_ref2 = _quartic_reference_scale(kappa, lambda4, T)
    kappa_eff = abs(kappa) + 3.0 * lambda4 * x_ref2
    limit = QUARTIC_STABILITY * min(1.0 / eta, 1.0 / math.sqrt(kappa_eff))
    if not 0 < tau_sim <= limit:
        raise InvalidParameterError(f"tau_sim={tau_sim} must lie in (0, {limit:.3g}]")

    rng = replica_rng(seed, replica)
    kick_scale = math.sqrt(2.0 * T * eta * tau_sim)
    burn_in = math.ceil(QUARTIC_BURN_IN_TIME / (eta * tau_sim * subsample))
    out = np.empty(burn_in + n)
    x = math.sqrt(-kappa / lambda4) if kappa < 0 else 0.0
    v = 0.0
    for lo in range(0, out.size, QUARTIC_CHUNK):
        chunk = out[lo : lo + QUARTIC_CHUNK]
        kicks = kick_scale * rng.standard_normal(chunk.size * subsample)
        x, v = quartic_euler_chunk(x, v, eta, kappa, lambda4, tau_sim, kicks, subsample, chunk)
    _LOGGER.debug("Quartic run: %d observations after %d burn-in", n, burn_in)

    series = TimeSeries(
        tau=tau_sim * subsample, values=out[burn_in:], seed=seed, scheme=Scheme.EULER
    )
    report = euler_mle(series, with_kappa=True, with_cubic=True)
    return dataclasses.replace(
        report, conjecture_check=True, diagnostic_only=("kappa_hat", "lambda4_hat")
    )


def run_replicas(
    task: Callable[[int, int], R], seed: int, replicas: int, workers: int | None = None
) -> list[R]:
    """Run task(seed, replica) for replica = 0..replicas-1 on a thread pool, in replica order."""
    if replicas < 1:
        raise InvalidParameterError(f"replicas must be at least 1, got {replicas}")
    _LOGGER.info("Running %d replicas with seed %d", replicas, seed)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda replica: task(seed, replica), range(replicas)))


def _mean_and_error(
    values: Sequence[float | None], errors: Sequence[float | None]
) -> tuple[float | None, float | None]:
    if any(v is None for v in values):
        return None, None
    arr = np.asarray(values, dtype=float)
    if arr.size == 1:
        return float(arr[0]), errors[0]
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def aggregate_reports(reports: Sequence[EstimateReport]) -> EstimateReport:
    """Mean of replica estimates with the standard error of the mean.

    Raises:
        InvalidParameterError: If reports is empty or mixes schemes or sampling intervals.
    """
    if not reports:
        raise InvalidParameterError("no reports to aggregate")
    first = reports[0]
    if any(r.scheme != first.scheme or r.tau != first.tau for r in reports):
        raise InvalidParameterError("reports mix likelihood schemes or sampling intervals")
    merged: dict[str, float | None] = {}
    for name in ("eta", "kappa", "lambda4", "sigma2", "temperature"):
        merged[f"{name}_hat"], merged[f"{name}_se"] = _mean_and_error(
            [getattr(r, f"{name}_hat") for r in reports],
            [getattr(r, f"{name}_se") for r in reports],
        )
    return dataclasses.replace(first, replicas=len(reports), **merged)
