"""Tests for arma_rg.sde_exact: exact and Euler discretizations of linear SDEs."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import linalg

from arma_rg.arma import autocovariance, replica_rng
from arma_rg.const import FixedPointClass, Scheme
from arma_rg.decimation import decimate_arma21, model_from_params, params_from_model
from arma_rg.exceptions import DegenerateSamplingError, InvalidParameterError
from arma_rg.models import Arma21Params, LinearSde2D
from arma_rg.sde_exact import (
    compare_discretizations,
    continuum_to_fixed_point,
    euler_discretize,
    exact_arma_params,
    exact_to_sde,
    gauge_partner,
    mat_exp_2x2,
    simulate_exact,
    small_tau_expansion,
    stationary_covariance,
    transition_covariance,
)


def _random_sdes(count: int) -> list[LinearSde2D]:
    rng = replica_rng(17)
    sdes = []
    for _ in range(count):
        sxx2, svv2 = rng.uniform(0.05, 1.0), rng.uniform(0.5, 2.0)
        sdes.append(
            LinearSde2D(
                lam=float(rng.uniform(0.0, 0.5)),
                kappa=float(rng.uniform(0.1, 3.0)),
                eta=float(rng.uniform(0.2, 2.0)),
                sxx2=float(sxx2),
                sxv2=float(rng.uniform(-0.5, 0.5) * math.sqrt(sxx2 * svv2)),
                svv2=float(svv2),
            )
        )
    return sdes


def _van_loan_covariance(sde: LinearSde2D, tau: float) -> np.ndarray:
    block = np.block([[-sde.drift, sde.diffusion], [np.zeros((2, 2)), sde.drift.T]])
    expm = linalg.expm(block * tau)
    return expm[2:, 2:].T @ expm[:2, 2:]


class TestMatExp:
    """Tests for the closed-form 2x2 matrix exponential."""

    @pytest.mark.parametrize(
        "sde",
        [
            LinearSde2D(kappa=4.0, eta=0.5),
            LinearSde2D(kappa=0.1, eta=3.0),
            LinearSde2D(kappa=1.0, eta=2.0),
            LinearSde2D(eta=1.0),
            LinearSde2D(),
        ],
        ids=["underdamped", "overdamped", "critical", "free", "zero"],
    )
    def test_matches_scipy(self, sde: LinearSde2D) -> None:
        for t in (0.0, 0.01, 0.7, 3.0):
            np.testing.assert_allclose(
                mat_exp_2x2(sde, t), linalg.expm(sde.drift * t), rtol=1e-10, atol=1e-12
            )

    def test_negative_time_raises(self, harmonic: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="non-negative"):
            mat_exp_2x2(harmonic, -1.0)


class TestTransitionCovariance:
    """Tests for the transition covariance."""

    def test_closed_form_matches_quadrature(self, noisy_sde: LinearSde2D) -> None:
        for tau in (0.05, 0.5, 2.0):
            closed = transition_covariance(noisy_sde, tau, method="closed")
            quad = transition_covariance(noisy_sde, tau, method="quad")
            np.testing.assert_allclose(closed, quad, rtol=1e-8, atol=1e-14)

    @pytest.mark.parametrize("offset", [1e-12, 1e-8, 1e-6, 1e-4, -1e-8, -1e-4])
    def test_near_critical_damping(self, offset: float) -> None:
        sde = LinearSde2D(kappa=0.25 + offset, eta=1.0, svv2=1.0)
        for tau in (0.05, 0.3, 1.0, 5.0):
            expected = _van_loan_covariance(sde, tau)
            for method in ("closed", "quad", "auto"):
                sigma = transition_covariance(sde, tau, method=method)
                np.testing.assert_allclose(
                    sigma, expected, rtol=1e-8, atol=1e-15, err_msg=f"{method} tau={tau}"
                )

    def test_integrated_ou(self, integrated_ou: LinearSde2D) -> None:
        tau = 0.3
        sigma = transition_covariance(integrated_ou, tau)
        e1, e2 = math.exp(-tau), math.exp(-2.0 * tau)
        var_x = 2.0 * (tau - 2.0 * (1.0 - e1) + (1.0 - e2) / 2.0)
        cov_xv = 2.0 * ((1.0 - e1) - (1.0 - e2) / 2.0)
        var_v = 1.0 - e2
        np.testing.assert_allclose(sigma, [[var_x, cov_xv], [cov_xv, var_v]], rtol=1e-10)

    def test_long_time_limit_is_stationary(self, harmonic: LinearSde2D) -> None:
        np.testing.assert_allclose(
            transition_covariance(harmonic, 60.0), stationary_covariance(harmonic), atol=1e-10
        )

    def test_equipartition(self, harmonic: LinearSde2D) -> None:
        """kappa <x^2> = <v^2> = T with T = svv2 / (2 eta)."""
        cov = stationary_covariance(harmonic)
        np.testing.assert_allclose(cov, np.eye(2), atol=1e-12)

    def test_unknown_method_raises(self, harmonic: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="method"):
            transition_covariance(harmonic, 0.1, method="taylor")

    def test_unstable_has_no_stationary_law(self, integrated_ou: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="stable"):
            stationary_covariance(integrated_ou)


class TestExactArmaParams:
    """Tests for the exact ARMA(2,1) parameters."""

    def test_integrated_ou(self, integrated_ou: LinearSde2D) -> None:
        tau = 0.01
        params = exact_arma_params(integrated_ou, tau)
        assert params.psi == pytest.approx(1.0 + math.exp(-tau), rel=1e-12)
        assert params.theta == pytest.approx(-math.exp(-tau), rel=1e-12)
        assert params.is_psd()

    def test_autocovariance_matches_sampled_process(self, harmonic: LinearSde2D) -> None:
        tau = 0.4
        model = model_from_params(exact_arma_params(harmonic, tau))
        gamma = autocovariance(model, 5)
        stationary = stationary_covariance(harmonic)
        expected = [
            (mat_exp_2x2(harmonic, k * tau) @ stationary)[0, 0] for k in range(6)
        ]
        np.testing.assert_allclose(gamma, expected, rtol=1e-8, atol=1e-12)

    def test_small_tau_expansion(self, noisy_sde: LinearSde2D) -> None:
        for tau in (1e-2, 5e-3):
            exact = exact_arma_params(noisy_sde, tau).as_array()
            series = small_tau_expansion(noisy_sde, tau).as_array()
            scale = np.array([1.0, 1.0, tau, tau])
            assert np.max(np.abs(exact - series) / scale) < 50.0 * tau**3

    def test_rg_invariance(self) -> None:
        for sde in _random_sdes(20):
            for tau in (0.1, 0.05, 0.02, 0.01):
                coarse = decimate_arma21(exact_arma_params(sde, tau)).as_array()
                target = exact_arma_params(sde, 2.0 * tau).as_array()
                np.testing.assert_allclose(coarse, target, rtol=1e-9, atol=1e-15)

    def test_euler_violates_invariance_at_third_order(self) -> None:
        sde = LinearSde2D(kappa=1.0, eta=0.5, svv2=1.0)
        taus = np.array([0.04, 0.02, 0.01, 0.005])
        residuals = []
        for tau in taus:
            coarse = decimate_arma21(params_from_model(euler_discretize(sde, tau)))
            target = params_from_model(euler_discretize(sde, 2.0 * tau))
            residuals.append(np.max(np.abs(coarse.as_array() - target.as_array())[2:]))
        slope = np.polyfit(np.log(taus), np.log(residuals), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.2)

    def test_sampling_node_raises(self) -> None:
        sde = LinearSde2D(kappa=1.0, svv2=1.0)
        with pytest.raises(DegenerateSamplingError):
            exact_arma_params(sde, math.pi)

    def test_nonpositive_tau_raises(self, harmonic: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="tau"):
            exact_arma_params(harmonic, 0.0)


class TestContinuumToFixedPoint:
    """Tests for the class-D parameters of a linear SDE."""

    def test_integrated_ou(self, integrated_ou: LinearSde2D) -> None:
        spec = continuum_to_fixed_point(integrated_ou)
        assert spec.kind is FixedPointClass.D
        assert (spec.u, spec.z, spec.s, spec.b) == pytest.approx((-1.0, 0.5, 0.0, 1.0 / 3.0))


class TestEulerDiscretize:
    """Tests for the semi-implicit Euler ARMA."""

    def test_velocity_noise_only_is_ar2(self, harmonic: LinearSde2D) -> None:
        tau = 0.01
        model = euler_discretize(harmonic, tau)
        assert model.q == 0
        assert model.phi == pytest.approx((2.0 - tau - tau**2, -1.0 + tau))
        assert model.mu == pytest.approx(math.sqrt(2.0 * tau**3))

    def test_position_noise_gives_ma_term(self, noisy_sde: LinearSde2D) -> None:
        model = euler_discretize(noisy_sde, 0.1)
        assert model.q == 1
        assert abs(model.nu[0]) <= model.mu

    def test_compare_discretizations(self, harmonic: LinearSde2D) -> None:
        rows = compare_discretizations(harmonic, [0.1, 0.01])
        assert [row["tau"] for row in rows] == [0.1, 0.01]
        assert rows[1]["psi_exact"] == pytest.approx(rows[1]["psi_euler"], abs=1e-4)
        assert rows[1]["theta_exact"] == pytest.approx(rows[1]["theta_euler"], abs=1e-4)


class TestSimulateExact:
    """Tests for sampling the exact transition."""

    def test_reproducible_and_labelled(self, harmonic: LinearSde2D) -> None:
        first = simulate_exact(harmonic, 0.1, 100, seed=3, stationary=True)
        second = simulate_exact(harmonic, 0.1, 100, seed=3, stationary=True)
        np.testing.assert_array_equal(first.values, second.values)
        assert first.scheme is Scheme.EXACT
        assert len(first) == 100

    def test_initial_state(self, integrated_ou: LinearSde2D) -> None:
        series = simulate_exact(integrated_ou, 0.1, 1, seed=0, x0=2.5)
        assert series.values[0] == 2.5

    def test_deterministic_without_noise(self) -> None:
        sde = LinearSde2D(kappa=1.0, eta=0.0)
        series = simulate_exact(sde, 0.1, 50, seed=0, x0=1.0)
        np.testing.assert_allclose(series.values, np.cos(0.1 * np.arange(50)), atol=1e-12)

    def test_stationary_variance(self, harmonic: LinearSde2D) -> None:
        series = simulate_exact(harmonic, 0.5, 200_000, seed=5, stationary=True)
        assert series.values.var() == pytest.approx(1.0, rel=0.05)

    def test_invalid_length_raises(self, harmonic: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="n must be"):
            simulate_exact(harmonic, 0.1, 0, seed=0)


class TestExactToSde:
    """Tests for inverting exact parameters."""

    def test_roundtrip(self, harmonic: LinearSde2D) -> None:
        tau = 0.2
        sde = exact_to_sde(exact_arma_params(harmonic, tau), tau)
        assert sde.eta == pytest.approx(1.0, rel=1e-9)
        assert sde.kappa == pytest.approx(1.0, rel=1e-9)
        assert sde.svv2 == pytest.approx(2.0, rel=1e-8)
        assert sde.sxx2 == pytest.approx(0.0, abs=1e-8)

    def test_overdamped_roundtrip(self) -> None:
        original = LinearSde2D(kappa=0.2, eta=3.0, sxx2=0.3, svv2=1.0)
        tau = 0.1
        sde = exact_to_sde(exact_arma_params(original, tau), tau)
        np.testing.assert_allclose(
            [sde.eta, sde.kappa, sde.sxx2, sde.svv2], [3.0, 0.2, 0.3, 1.0], rtol=1e-7
        )

    def test_positive_theta_raises(self) -> None:
        params = exact_arma_params(LinearSde2D(eta=1.0, svv2=1.0), 0.1)
        with pytest.raises(InvalidParameterError, match="theta"):
            exact_to_sde(Arma21Params(params.psi, 0.1, params.alpha, params.beta), 0.1)


class TestGaugePartner:
    """Tests for observationally equivalent SDEs."""

    def test_same_exact_parameters(self, noisy_sde: LinearSde2D) -> None:
        partner = gauge_partner(noisy_sde, lam=0.0)
        assert partner.lam == 0.0
        for tau in (0.05, 0.5):
            np.testing.assert_allclose(
                exact_arma_params(partner, tau).as_array(),
                exact_arma_params(noisy_sde, tau).as_array(),
                rtol=1e-9,
            )

    def test_negative_noise_raises(self, noisy_sde: LinearSde2D) -> None:
        with pytest.raises(InvalidParameterError, match="PSD"):
            gauge_partner(noisy_sde, lam=-3.0)
