"""
Shared pytest fixtures: reference-default runs are computed once per session.
"""
import math

import numpy as np
import pytest
from scipy import integrate

from core_model import make_grid, reference_scenario
from pipelines.ci_pipeline import run_ci
from pipelines.rsi_pipeline import run_rsi

REFERENCE_A = complex(-0.584, -0.010)
REFERENCE_P = 0.341
REFERENCE_A_S = complex(-0.607, -0.161)
REFERENCE_P_S = 0.394
REFERENCE_TOLERANCE = 0.03


def momentum_average(func, t_f: float = 40.0, sigma: float = 2.0) -> complex:
    """Average of func(k, t_f) over the momentum density of the sigma gaussian (natural units)."""
    variance = 1.0 / (4.0 * sigma ** 2)

    def weight(k):
        return math.exp(-k * k / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)

    span = 12.0 * math.sqrt(variance)
    re, _ = integrate.quad(lambda k: weight(k) * func(k, t_f).real, -span, span, limit=400, epsabs=1e-13, epsrel=1e-12)
    im, _ = integrate.quad(lambda k: weight(k) * func(k, t_f).imag, -span, span, limit=400, epsabs=1e-13, epsrel=1e-12)
    return complex(re, im)


def return_amplitude(t_f: float = 40.0) -> complex:
    """<exp(-i E t_f)> over the momentum density: the unit-normalized RSI amplitude."""
    return momentum_average(lambda k, t: complex(math.cos(t * math.hypot(k, 1.0)), -math.sin(t * math.hypot(k, 1.0))), t_f)


@pytest.fixture(scope="session")
def reference():
    """Reference-default scenario (n = 4096 on [-80, 80), t in [0, 40])."""
    return reference_scenario()


@pytest.fixture(scope="session")
def reference_ci(reference):
    """CI run on the reference scenario."""
    return run_ci(reference)


@pytest.fixture(scope="session")
def reference_rsi_plus(reference):
    """Positive-energy RSI run on the reference scenario."""
    return run_rsi(reference, "+")


@pytest.fixture(scope="session")
def reference_rsi_minus(reference):
    """Negative-energy RSI run on the reference scenario."""
    return run_rsi(reference, "-")


@pytest.fixture(scope="session")
def exact_return_amplitude():
    """Quadrature value of <exp(-i 40 E)> for the sigma = 2 packet."""
    return return_amplitude(40.0)


@pytest.fixture
def small_grid():
    """Symmetric 256-site grid on [-12.8, 12.8)."""
    return make_grid(-12.8, 12.8, 256)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: refined-grid runs that take noticeably longer")
