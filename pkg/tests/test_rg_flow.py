"""Tests for arma_rg.rg_flow: RG map, fixed points and classification."""

from __future__ import annotations

import math

import numpy as np
import pytest

from arma_rg.arma import replica_rng, rotation_coordinates
from arma_rg.const import FixedPointClass, Verdict
from arma_rg.decimation import model_from_params
from arma_rg.exceptions import InvalidParameterError, UnsupportedOrderError
from arma_rg.models import Arma21Params, FixedPointSpec, LinearSde2D, TaylorParams
from arma_rg.rg_flow import (
    basin_grid,
    classify,
    euler_initial_condition,
    flow,
    inertial_flow_closed_form,
    inertial_step,
    make_fixed_point,
    rg_step,
)
from arma_rg.sde_exact import continuum_to_fixed_point, exact_arma_params, small_tau_expansion

GRID = (-1.0, -0.3, 0.4, 1.2)


def _fixed_point_specs() -> list[FixedPointSpec]:
    specs = [FixedPointSpec(FixedPointClass.A, s=s) for s in GRID]
    for kind in (FixedPointClass.B, FixedPointClass.C):
        specs += [FixedPointSpec(kind, u=u, s=s) for u in GRID for s in GRID]
    specs += [
        FixedPointSpec(FixedPointClass.D, u=u, s=s, z=z, b=b)
        for u in GRID
        for s in GRID
        for z in GRID
        for b in GRID
    ]
    return specs


def _evaluate(tp: TaylorParams, tau: float) -> Arma21Params:
    values = [float(np.polyval(series[::-1], tau)) for series in tp.stack()]
    return Arma21Params.from_array(values)


class TestRgStep:
    """Tests for one step of the RG map."""

    @pytest.mark.parametrize("spec", _fixed_point_specs(), ids=lambda s: s.kind.value)
    def test_fixed_points_are_invariant(self, spec: FixedPointSpec) -> None:
        tp = make_fixed_point(spec, 3)
        assert np.max(np.abs(rg_step(tp).stack() - tp.stack())) < 1e-10

    @pytest.mark.parametrize("kind", [FixedPointClass.A, FixedPointClass.B])
    def test_closed_form_classes_at_high_order(self, kind: FixedPointClass) -> None:
        spec = FixedPointSpec(kind, u=0.0 if kind is FixedPointClass.A else -0.7, s=0.9)
        tp = make_fixed_point(spec, 8)
        np.testing.assert_allclose(rg_step(tp).stack(), tp.stack(), atol=1e-12)

    def test_matches_exact_doubling(self) -> None:
        """At order 0 the map is plain decimation of the order-0 parameters."""
        tp = TaylorParams([0.5], [-0.2], [1.0], [0.3])
        stepped = rg_step(tp)
        assert stepped.psi[0] == pytest.approx(0.25 - 0.4)
        assert stepped.theta[0] == pytest.approx(-0.04)


class TestMakeFixedPoint:
    """Tests for fixed-point templates."""

    def test_order0_values(self) -> None:
        expected = {
            FixedPointClass.A: (0.0, 0.0),
            FixedPointClass.B: (1.0, 0.0),
            FixedPointClass.C: (-1.0, -1.0),
            FixedPointClass.D: (2.0, -1.0),
        }
        for kind, (psi0, theta0) in expected.items():
            tp = make_fixed_point(FixedPointSpec(kind, s=1.0))
            assert (tp.psi[0], tp.theta[0]) == (psi0, theta0)

    def test_class_c_beyond_table_raises(self) -> None:
        with pytest.raises(UnsupportedOrderError, match="order 3"):
            make_fixed_point(FixedPointSpec(FixedPointClass.C, u=1.0, s=1.0), 4)

    def test_negative_order_raises(self) -> None:
        with pytest.raises(InvalidParameterError, match="K"):
            make_fixed_point(FixedPointSpec(FixedPointClass.A), -1)

    def test_class_d_matches_small_tau_expansion(self) -> None:
        sde = LinearSde2D(kappa=1.5, eta=0.8, svv2=2.0)
        tp = make_fixed_point(continuum_to_fixed_point(sde), 3)
        for tau in (1e-3, 1e-2, 0.1):
            series = _evaluate(tp, tau).as_array()
            expansion = small_tau_expansion(sde, tau).as_array()
            np.testing.assert_allclose(series, expansion, rtol=1e-12)

    def test_class_d_approximates_exact_discretization(self) -> None:
        sde = LinearSde2D(kappa=1.5, eta=0.8, svv2=2.0)
        series = _evaluate(make_fixed_point(continuum_to_fixed_point(sde), 3), 1e-3)
        exact = exact_arma_params(sde, 1e-3)
        assert series.psi == pytest.approx(exact.psi, rel=1e-10)
        assert series.theta == pytest.approx(exact.theta, rel=1e-10)
        assert series.alpha == pytest.approx(exact.alpha, rel=1e-2)
        assert series.beta == pytest.approx(exact.beta, rel=1e-2)


class TestInertialFlow:
    """Tests for the third-order noise flow near the D point."""

    def test_one_step(self) -> None:
        assert inertial_step(1.0, 0.0) == pytest.approx((0.75, 0.125), abs=1e-12)

    def test_rg_step_reproduces_inertial_step(self, euler_ic: TaylorParams) -> None:
        stepped = rg_step(euler_ic)
        assert stepped.alpha[3] == pytest.approx(0.75, abs=1e-12)
        assert stepped.beta[3] == pytest.approx(0.125, abs=1e-12)

    def test_closed_form(self) -> None:
        sigma2 = 2.5
        assert inertial_flow_closed_form(sigma2, 0.0, 1) == pytest.approx(
            (0.75 * sigma2, 0.125 * sigma2), abs=1e-12
        )
        assert inertial_flow_closed_form(sigma2, 0.0, math.inf) == pytest.approx(
            (2.0 * sigma2 / 3.0, sigma2 / 6.0), abs=1e-12
        )

    def test_closed_form_matches_iteration(self) -> None:
        point = (0.4, -0.3)
        for steps in range(1, 8):
            point = inertial_step(*point)
            assert inertial_flow_closed_form(0.4, -0.3, steps) == pytest.approx(point, abs=1e-12)

    def test_negative_steps_raise(self) -> None:
        with pytest.raises(InvalidParameterError, match="steps"):
            inertial_flow_closed_form(1.0, 0.0, -1)

    def test_euler_orbit_limit(self, euler_ic: TaylorParams) -> None:
        orbit = flow(euler_ic, 20)
        assert len(orbit) == 21
        assert not orbit.divergent
        assert orbit.last.alpha[3] == pytest.approx(2.0 / 3.0, abs=1e-10)
        assert orbit.last.beta[3] == pytest.approx(1.0 / 6.0, abs=1e-10)


class TestFlow:
    """Tests for orbit computation."""

    def test_divergent_orbit_stops(self) -> None:
        tp = TaylorParams([2.5], [1.5], [1.0], [0.0])
        orbit = flow(tp, 50)
        assert orbit.divergent
        assert len(orbit) < 51

    def test_euler_initial_condition_needs_order_three(self) -> None:
        with pytest.raises(InvalidParameterError, match="K >= 3"):
            euler_initial_condition(1.0, 0.0, 1.0, K=2)


class TestClassify:
    """Tests for fixed-point classification."""

    @pytest.mark.parametrize(
        "spec",
        [
            FixedPointSpec(FixedPointClass.A, s=0.5),
            FixedPointSpec(FixedPointClass.B, u=-0.5, s=1.0),
            FixedPointSpec(FixedPointClass.C, u=0.2, s=0.3),
            FixedPointSpec(FixedPointClass.D, u=-1.0, s=0.2, z=0.4, b=0.1),
        ],
        ids=lambda s: s.kind.value,
    )
    def test_fixed_point_recovers_spec(self, spec: FixedPointSpec) -> None:
        result = classify(make_fixed_point(spec))
        assert result.verdict == Verdict(spec.kind.value)
        assert result.spec is not None
        for name in ("u", "s", "z", "b"):
            assert getattr(result.spec, name) == pytest.approx(getattr(spec, name), abs=1e-9)

    def test_interior_points_flow_to_a(self) -> None:
        rng = replica_rng(2024)
        for _ in range(100):
            theta0 = rng.uniform(-0.95, 0.95)
            psi0 = rng.uniform(-0.95, 0.95) * (1.0 - theta0)
            tp = TaylorParams.zeros(3).replace("psi", 0, psi0)
            tp = tp.replace("theta", 0, theta0).replace("alpha", 0, 1.0)
            assert classify(tp).verdict is Verdict.A, (psi0, theta0)

    def test_euler_ic_flows_to_d(self) -> None:
        eta, kappa, sigma2 = 1.3, 0.7, 2.0
        result = classify(euler_initial_condition(eta, kappa, sigma2))
        expected = continuum_to_fixed_point(LinearSde2D(kappa=kappa, eta=eta, svv2=sigma2))
        assert result.verdict is Verdict.D
        assert result.spec is not None
        for name in ("u", "s", "z", "b"):
            assert getattr(result.spec, name) == pytest.approx(
                getattr(expected, name), abs=1e-6
            )

    def test_boundary_is_unresolved(self) -> None:
        tp = TaylorParams([0.5], [0.5], [1.0], [0.0])
        result = classify(tp)
        assert result.verdict is Verdict.UNRESOLVED
        assert result.iterations == 0

    def test_outside_diverges(self) -> None:
        assert classify(TaylorParams([0.0], [1.5], [1.0], [0.0])).verdict is Verdict.DIVERGENT


class TestClassCGeometry:
    """Tests for the three-branched jump process."""

    TAU = 0.01

    def _model_params(self) -> Arma21Params:
        spec = FixedPointSpec(FixedPointClass.C, u=0.05, s=1e-6)
        return _evaluate(make_fixed_point(spec, 3), self.TAU)

    def test_eigenvalue_arguments(self) -> None:
        params = self._model_params()
        companion = np.array([[params.psi, params.theta], [1.0, 0.0]])
        arguments = sorted(np.angle(np.linalg.eigvals(companion)))
        np.testing.assert_allclose(arguments, [-2 * np.pi / 3, 2 * np.pi / 3], atol=1e-10)

    def test_trajectory_visits_sectors_cyclically(self) -> None:
        params = self._model_params()
        model = model_from_params(params)
        rng = replica_rng(9)
        n = 2000
        eps = rng.standard_normal(n + 1)
        x = np.zeros(n + 1)
        x[0], x[1] = 0.0, 1.0
        for t in range(1, n):
            noise = model.mu * eps[t + 1] + model.nu[0] * eps[t]
            x[t + 1] = params.psi * x[t] + params.theta * x[t - 1] + noise

        frame, angle = rotation_coordinates([params.psi, params.theta])
        coords = frame @ np.vstack([x[1:], x[:-1]])
        phase = np.mod(np.arctan2(coords[1], coords[0]), 2 * np.pi)
        sector = np.floor(phase / (2 * np.pi / 3)).astype(int)
        expected = round(angle / (2 * np.pi / 3)) % 3
        advanced = np.mod(np.diff(sector), 3) == expected
        assert advanced.mean() >= 0.99


class TestBasinGrid:
    """Tests for the basin sweep."""

    def test_small_grid(self) -> None:
        results = basin_grid(resolution=5)
        assert len(results) == 25
        verdicts = {(psi0, theta0): r.verdict for psi0, theta0, r in results}
        assert verdicts[(0.0, 0.0)] is Verdict.A
        assert verdicts[(2.5, 1.5)] is Verdict.DIVERGENT

    def test_resolution_too_small_raises(self) -> None:
        with pytest.raises(InvalidParameterError, match="resolution"):
            basin_grid(resolution=1)
