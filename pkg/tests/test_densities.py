"""Density construction, normalization, and threshold derivatives."""

import math

import numpy as np
import pytest
from scipy import integrate

from survamp.densities import (
    DensityKind,
    make_lorentzian,
    make_power_threshold,
)

# closed-form constants of the standard scenarios, frozen after independent
# confirmation by adaptive quadrature (see test_normalization_quadrature)
N_S1 = 1.001594073193348            # 1/(1/2 + arctan(200)/pi)
OMEGA0_S1 = 1.5940466260370187e-3   # N gamma0 / (2 pi (e0^2 + (gamma0/2)^2))
C_S2 = 1.1283791670955126           # 2/sqrt(pi)


class TestConstruction:
    def test_lorentzian_norm_constant(self, s1):
        assert s1.norm_constant == pytest.approx(N_S1, rel=1e-14)

    def test_lorentzian_norm_tends_to_one_for_wide_separation(self):
        # full-line Lorentzian integrates to one; N -> 1 as (e0-e_min)/gamma0 grows
        seps = [10.0, 1e3, 1e6]
        norms = [make_lorentzian(0.0, sep, 1.0).norm_constant for sep in seps]
        assert norms[0] > norms[1] > norms[2] > 1.0
        assert norms[2] == pytest.approx(1.0, abs=1e-6)

    def test_power_threshold_norm_constant(self, s2):
        assert s2.norm_constant == pytest.approx(C_S2, rel=1e-14)
        assert s2.norm_constant == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-15)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            make_lorentzian(0.0, -1.0, 0.01)   # peak below threshold
        with pytest.raises(ValueError):
            make_lorentzian(0.0, 1.0, 0.0)     # zero width
        with pytest.raises(ValueError):
            make_power_threshold(0.0, 1.0, 1.0)   # lam not in (0,1)
        with pytest.raises(ValueError):
            make_power_threshold(0.0, 0.5, -2.0)  # bad scale


class TestEvaluate:
    def test_zero_below_threshold(self, s1, s2):
        assert s1.evaluate(-0.5) == 0.0
        assert s2.evaluate(-1e-12) == 0.0

    def test_lorentzian_peak_value(self, s1):
        # N/(2 pi) * gamma0/(gamma0/2)^2 = 2N/(pi gamma0)
        expected = 2.0 * N_S1 / (math.pi * 0.01)
        assert s1.evaluate(1.0) == pytest.approx(expected, rel=1e-13)
        assert expected == pytest.approx(63.76345908810677, rel=1e-12)

    def test_lorentzian_threshold_value(self, s1):
        assert s1.evaluate(0.0) == pytest.approx(OMEGA0_S1, rel=1e-13)

    def test_power_threshold_vanishes_at_threshold(self, s2):
        assert s2.evaluate(0.0) == 0.0
        d = make_power_threshold(-2.0, 0.3, 0.7)
        assert d.evaluate(-2.0) == 0.0

    def test_power_threshold_point_value(self, s2):
        assert s2.evaluate(1.0) == pytest.approx(C_S2 * math.exp(-1.0), rel=1e-14)

    def test_vectorized_evaluation(self, s1):
        eps = np.array([-1.0, 0.0, 1.0, 2.0])
        vals = s1.evaluate(eps)
        assert vals.shape == (4,)
        assert vals[0] == 0.0
        assert vals[2] == pytest.approx(s1.evaluate(1.0))

    def test_shifted_threshold(self):
        d = make_lorentzian(2.0, 3.0, 0.01)
        assert d.evaluate(1.9999) == 0.0
        assert d.evaluate(3.0) == pytest.approx(
            2.0 * d.norm_constant / (math.pi * 0.01), rel=1e-13)


class TestNormalization:
    @pytest.mark.parametrize("maker,args", [
        (make_lorentzian, (0.0, 1.0, 0.01)),
        (make_lorentzian, (-1.0, 0.3, 0.2)),
        (make_power_threshold, (0.0, 0.5, 1.0)),
        (make_power_threshold, (0.5, 0.25, 2.0)),
    ])
    def test_normalization_quadrature(self, maker, args):
        # the closed-form constant is checked by an independent adaptive
        # integration of the density itself
        d = maker(*args)
        hi = d.support_bound(1e-16)
        total = 0.0
        edges = np.unique(np.concatenate([[0.0], np.geomspace(1e-8, hi, 40)]))
        for a, b in zip(edges[:-1], edges[1:]):
            v, _ = integrate.quad(lambda x: float(d.profile(np.array([x]))[0]),
                                  a, b, limit=200)
            total += v
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_nonnegativity_randomized(self, s1, s2):
        rng = np.random.default_rng(1234)
        for d in (s1, s2):
            eps = rng.uniform(-5.0, 50.0, size=1_000_000)
            assert np.all(d.evaluate(eps) >= 0.0)


class TestThresholdDerivatives:
    def test_lorentzian_log_derivative_ratio(self, s1):
        # d/de ln omega at the threshold: 2 e0 / (e0^2 + (gamma0/2)^2)
        ratio = s1.threshold_derivative(1) / s1.threshold_derivative(0)
        assert ratio == pytest.approx(1.999950001249969, rel=1e-12)

    def test_lorentzian_order_zero_matches_eval(self, s1):
        assert s1.threshold_derivative(0) == pytest.approx(s1.evaluate(0.0), rel=1e-14)

    def test_power_threshold_eta_values(self, s2):
        assert s2.threshold_derivative(0) == pytest.approx(C_S2, rel=1e-14)
        assert s2.threshold_derivative(1) / s2.threshold_derivative(0) == pytest.approx(-1.0)
        # second derivative of C exp(-x) at 0 is +C
        assert s2.threshold_derivative(2) == pytest.approx(C_S2, rel=1e-14)

    def test_power_threshold_eta_via_eval_limit(self, s2):
        # eta0 = lim eval(eps)/sqrt(eps - e_min)
        for eps in (1e-6, 1e-8, 1e-10):
            assert s2.evaluate(eps) / math.sqrt(eps) == pytest.approx(C_S2, rel=1e-5)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_richardson_consistency(self, s1, s2, k):
        # closed forms against Richardson-extrapolated one-sided differences
        for d in (s1, s2):
            if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
                f = lambda x: float(d.profile(np.array([x]))[0])
                h0 = 1e-3 * math.hypot(d.params.e0 - d.e_min, 0.5 * d.params.gamma0)
            else:
                f = lambda x: float(d.profile(np.array([x]))[0]) / x ** d.params.lam
                h0 = 1e-3 * d.params.eta_scale
            ref = d.threshold_derivative(k)
            est = _richardson(f, k, h0)
            assert est == pytest.approx(ref, rel=1e-6)

    def test_unsupported_order(self, s1, s2):
        for d in (s1, s2):
            d.threshold_derivative(4)   # supported
            with pytest.raises(ValueError):
                d.threshold_derivative(5)
            with pytest.raises(ValueError):
                d.threshold_derivative(-1)


def _richardson(f, k, h0):
    def diff(h):
        if k == 0:
            # cubic extrapolation of f to 0 from nodes h..4h
            return 4 * f(h) - 6 * f(2 * h) + 4 * f(3 * h) - f(4 * h)
        if k == 1:
            return (-26 * f(h) + 57 * f(2 * h) - 42 * f(3 * h) + 11 * f(4 * h)) / (6 * h)
        return (3 * f(h) - 8 * f(2 * h) + 7 * f(3 * h) - 2 * f(4 * h)) / (h * h)

    order = {0: 4, 1: 3, 2: 2}[k]
    d1, d2 = diff(h0), diff(h0 / 2.0)
    return d2 + (d2 - d1) / (2.0 ** order - 1.0)
