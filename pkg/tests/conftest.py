"""Shared test fixtures for arma_rg tests."""

from __future__ import annotations

import pytest

from arma_rg.models import ArmaModel, LinearSde2D, TaylorParams
from arma_rg.rg_flow import euler_initial_condition

# Integrated Ornstein-Uhlenbeck particle: eta = 1, T = 1, no restoring force
INTEGRATED_OU = LinearSde2D(eta=1.0, svv2=2.0)

# Underdamped harmonic particle with the same bath
HARMONIC = LinearSde2D(kappa=1.0, eta=1.0, svv2=2.0)


@pytest.fixture
def integrated_ou() -> LinearSde2D:
    return INTEGRATED_OU


@pytest.fixture
def harmonic() -> LinearSde2D:
    return HARMONIC


@pytest.fixture
def noisy_sde() -> LinearSde2D:
    """Stable SDE with drag, position noise and correlated noises."""
    return LinearSde2D(lam=0.3, kappa=2.0, eta=0.7, sxx2=0.5, sxv2=0.2, svv2=1.5)


@pytest.fixture
def ar2_model() -> ArmaModel:
    """Stationary AR(2) with complex roots."""
    return ArmaModel(phi=(1.2, -0.5), nu=(), mu=1.0)


@pytest.fixture
def arma21_model() -> ArmaModel:
    return ArmaModel(phi=(0.6, 0.2), nu=(0.4,), mu=1.3)


@pytest.fixture
def euler_ic() -> TaylorParams:
    """Euler AR(2) initial condition with eta = 1, kappa = 1, sigma2 = 1."""
    return euler_initial_condition(1.0, 1.0, 1.0)
