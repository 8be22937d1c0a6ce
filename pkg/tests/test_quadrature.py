"""Oscillatory quadrature engines against closed-form and difference oracles."""

import math

import numpy as np
import pytest

from survamp.densities import make_lorentzian, make_power_threshold
from survamp.grids import log_grid
from survamp.oracles import lorentzian_exact
from survamp.quadrature import (
    Method,
    QuadratureConfig,
    QuadratureError,
    amplitude,
    reduced_amplitude,
    weighted_amplitude,
)


def exact_s2(t):
    """(1 + i t)^(-3/2): closed form of the reduced amplitude for s2."""
    return (1.0 + 1j * t) ** -1.5


class TestReducedAmplitude:
    def test_normalization_at_t_zero(self, s1, s2, cfg_default, cfg_panel):
        for d in (s1, s2):
            for cfg in (cfg_default, cfg_panel):
                b = reduced_amplitude(d, 0.0, cfg)
                assert abs(b - 1.0) < cfg.rel_tol

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0, 1e3, 1e5, 1e6])
    def test_power_threshold_closed_form(self, s2, cfg_default, t):
        b = reduced_amplitude(s2, t, cfg_default)
        assert abs(b - exact_s2(t)) / abs(exact_s2(t)) < 1e-12

    def test_lorentzian_survival_near_five_lifetimes(self, s1, cfg_default):
        # |b(500)|^2 is within ~1% of e^-5 (the pole term dominates; the
        # normalization constant squared accounts for most of the deviation)
        b = reduced_amplitude(s1, 500.0, cfg_default)
        assert abs(b) ** 2 == pytest.approx(math.exp(-5.0), rel=0.01)
        # frozen oracle value (exponential-integral closed form)
        assert abs(b) ** 2 == pytest.approx(6.7592023342952e-3, rel=1e-9)

    def test_lorentzian_against_exponential_integral_oracle(self, s1, cfg_default):
        for t in (1.0, 50.0, 500.0, 2881.5, 1e4, 1e5):
            b = reduced_amplitude(s1, t, cfg_default)
            ref = lorentzian_exact(s1.params, s1.e_min, t, 1.0).value
            assert abs(b - ref) / abs(ref) < 1e-10

    def test_negative_time_rejected(self, s2, cfg_default):
        with pytest.raises(ValueError):
            reduced_amplitude(s2, -1.0, cfg_default)


class TestAmplitude:
    def test_value_at_zero(self, s1, s2, cfg_default):
        for d in (s1, s2):
            a = amplitude(d, 0.0, 1.0, cfg_default)
            assert a == pytest.approx(1.0 + 0.0j, abs=1e-10)

    def test_power_threshold_at_t10(self, s2, cfg_default):
        a = amplitude(s2, 10.0, 1.0, cfg_default)
        assert abs(a) ** 2 == pytest.approx(101.0 ** -1.5, rel=1e-12)
        assert abs(a) ** 2 == pytest.approx(9.851853368415735e-4, rel=1e-12)

    def test_lorentzian_inverse_power_tail(self, s1, cfg_default):
        # |a(1e5)| = hbar*omega0/t to 0.1%
        a = amplitude(s1, 1e5, 1.0, cfg_default)
        omega0 = s1.threshold_derivative(0)
        assert abs(a) == pytest.approx(omega0 / 1e5, rel=1e-3)
        assert abs(a) == pytest.approx(1.5940466e-8, rel=1e-4)

    def test_threshold_phase_factored(self, cfg_default):
        # a(t) = exp(-i e_min t/hbar) b(t) for a shifted threshold
        d = make_power_threshold(0.7, 0.5, 1.0)
        t, hbar = 3.0, 1.0
        a = amplitude(d, t, hbar, cfg_default)
        expected = np.exp(-1j * 0.7 * t) * exact_s2(t)
        assert abs(a - expected) / abs(expected) < 1e-12

    def test_hbar_scaling(self, s2, cfg_default):
        # b depends on t only through t/hbar
        a = amplitude(s2, 10.0, 2.0, cfg_default)
        assert abs(a - exact_s2(5.0)) / abs(exact_s2(5.0)) < 1e-12

    def test_unitarity_bound_on_grids(self, s1, s2, cfg_default):
        for d, grid in ((s1, log_grid(1.0, 1e6, 49)), (s2, log_grid(0.1, 1e6, 49))):
            for t in grid.times:
                assert abs(amplitude(d, float(t), 1.0, cfg_default)) <= 1.0 + 10 * cfg_default.rel_tol

    def test_riemann_lebesgue_envelope(self, s1, cfg_default):
        from survamp.dynamics import crossover_time
        t_as = crossover_time(s1, 1.0).t_as
        ref = abs(amplitude(s1, t_as, 1.0, cfg_default))
        tail_max = max(abs(amplitude(s1, float(t), 1.0, cfg_default))
                       for t in log_grid(10 * t_as, 1e3 * t_as, 31).times)
        assert tail_max < ref

    def test_fourier_smoothness_bound(self, s2, cfg_default):
        # t^(1+lam) |a| bounded (equals (t^2/(1+t^2))^(3/4) <= 1 here)
        vals = [float(t) ** 1.5 * abs(amplitude(s2, float(t), 1.0, cfg_default))
                for t in log_grid(1e2, 1e6, 25).times]
        assert max(vals) <= 1.0 + 1e-10


class TestWeightedAmplitude:
    @pytest.mark.parametrize("t", [1.0, 10.0, 1e3, 1e6])
    def test_power_threshold_closed_form(self, s2, cfg_default, t):
        w = weighted_amplitude(s2, t, 1.0, cfg_default)
        exact = 1.5 * (1.0 + 1j * t) ** -2.5
        assert abs(w - exact) / abs(exact) < 1e-12

    @pytest.mark.parametrize("density,t", [("s1", 7.0), ("s2", 7.0), ("s1", 300.0)])
    def test_derivative_self_check(self, density, t, s1, s2, cfg_default, request):
        # w(t) ~ i hbar (b(t+d) - b(t-d)) / (2d)
        d = {"s1": s1, "s2": s2}[density]
        delta = 1e-6 * t
        b_hi = reduced_amplitude(d, t + delta, cfg_default)
        b_lo = reduced_amplitude(d, t - delta, cfg_default)
        fd = 1j * (b_hi - b_lo) / (2 * delta)
        w = weighted_amplitude(d, t, 1.0, cfg_default)
        assert abs(w - fd) / abs(w) < 1e-6

    def test_lorentzian_richardson_derivative(self, s1, cfg_default):
        # conditionally convergent tail (x*omega ~ 1/x): quadrature against a
        # Richardson-extrapolated central difference of b at t = 1e4
        t = 1e4
        w = weighted_amplitude(s1, t, 1.0, cfg_default)

        def fd(delta):
            b_hi = reduced_amplitude(s1, t + delta, cfg_default)
            b_lo = reduced_amplitude(s1, t - delta, cfg_default)
            return 1j * (b_hi - b_lo) / (2 * delta)

        d1, d2 = fd(2e-2), fd(1e-2)
        richardson = d2 + (d2 - d1) / 3.0
        assert abs(w - richardson) / abs(w) < 1e-5

    def test_requires_positive_time(self, s1, cfg_default):
        with pytest.raises(ValueError):
            weighted_amplitude(s1, 0.0, 1.0, cfg_default)


class TestEngineCrossValidation:
    def test_engines_agree_on_random_pairs(self):
        # 100 seeded random (density, t) pairs; agreement to
        # max(1e-9 relative, 1e-15 absolute)
        rng = np.random.default_rng(987654321)
        cfg_de = QuadratureConfig()
        cfg_pn = QuadratureConfig(method=Method.PANEL_SERIES_ACCELERATION)
        for _ in range(100):
            if rng.random() < 0.5:
                e_min = float(rng.uniform(-0.5, 0.5))
                d = make_lorentzian(e_min, e_min + float(rng.uniform(0.5, 2.0)),
                                    float(rng.uniform(0.005, 0.05)))
                t = float(10.0 ** rng.uniform(0.0, 4.0))
            else:
                d = make_power_threshold(float(rng.uniform(-0.5, 0.5)),
                                         float(rng.uniform(0.2, 0.8)),
                                         float(rng.uniform(0.5, 2.0)))
                t = float(10.0 ** rng.uniform(-1.0, 4.0))
            b_de = reduced_amplitude(d, t, cfg_de)
            b_pn = reduced_amplitude(d, t, cfg_pn)
            assert abs(b_de - b_pn) <= max(1e-9 * abs(b_de), 1e-15)

    @pytest.mark.parametrize("t", [1e5, 1e6])
    def test_engines_agree_deep_asymptotic(self, s1, s2, cfg_default, cfg_panel, t):
        for d in (s1, s2):
            b_de = reduced_amplitude(d, t, cfg_default)
            b_pn = reduced_amplitude(d, t, cfg_panel)
            assert abs(b_de - b_pn) <= max(1e-9 * abs(b_de), 1e-15)


class TestConfigAndErrors:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureConfig(abs_tol=-1.0)
        with pytest.raises(ValueError):
            QuadratureConfig(max_panels=10)

    def test_panel_budget_exhaustion_reports(self, s1):
        cfg = QuadratureConfig(method=Method.PANEL_SERIES_ACCELERATION, max_panels=64)
        with pytest.raises(QuadratureError):
            reduced_amplitude(s1, 1e4, cfg)   # needs thousands of direct panels

    def test_nan_from_density_propagates(self, s2, cfg_default):
        import dataclasses
        bad = dataclasses.replace(s2, norm_constant=float("nan"))
        with pytest.raises(QuadratureError, match="non-finite"):
            reduced_amplitude(bad, 5.0, cfg_default)
