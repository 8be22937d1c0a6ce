import math

import numpy as np
import pytest
from scipy import special

from survamp.densities import make_lorentzian, make_power_threshold
from survamp.oracles import exp_e1_scaled
from survamp.quadrature import Method, QuadratureConfig


@pytest.fixture(scope="session", autouse=True)
def validate_exponential_integral_first():
    """The complex exponential integral backs the Lorentzian oracle, so its
    series/continued-fraction split is validated at real arguments before any
    amplitude test runs."""
    for w in np.concatenate([np.geomspace(1e-3, 1.0, 25), np.geomspace(1.0, 600.0, 25)]):
        ref = math.exp(w) * float(special.exp1(w))
        got = exp_e1_scaled(float(w))
        assert abs(got - ref) / ref < 1e-13, f"E1 validation failed at w={w}"
        assert abs(got.imag) < 1e-16 * abs(got)


@pytest.fixture(scope="session")
def s1():
    """Standard jump-class scenario: truncated Lorentzian, e_min=0, e0=1,
    gamma0=0.01 (lifetime tau = 100 at hbar = 1)."""
    return make_lorentzian(0.0, 1.0, 0.01)


@pytest.fixture(scope="session")
def s2():
    """Standard threshold-class scenario: sqrt threshold, unit profile scale.
    Exact amplitude (1 + i t)^(-3/2) at hbar = 1."""
    return make_power_threshold(0.0, 0.5, 1.0)


@pytest.fixture(scope="session")
def cfg_default():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def cfg_panel():
    return QuadratureConfig(method=Method.PANEL_SERIES_ACCELERATION)
