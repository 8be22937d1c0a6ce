"""Built-in verification suite: oracle equivalences and library invariants.

Each property is a pure function returning (passed, detail).  The suite is
deterministic (fixed RNG seeds, fixed grids) so repeated runs produce
byte-identical reports.  Run through the CLI ``selftest`` command or
:func:`run_all`.
"""

from __future__ import annotations

import math

import numpy as np

from . import asymptotics, dynamics, oracles, quadrature
from .asymptotics import AsymptoticOrder, lanczos_gamma
from .densities import DensityKind, make_lorentzian, make_power_threshold
from .grids import log_grid
from .quadrature import Method, QuadratureConfig

__all__ = ["run_all", "PROPERTIES"]

_SEED = 20260810


def _scenarios():
    s1 = make_lorentzian(0.0, 1.0, 0.01)
    s2 = make_power_threshold(0.0, 0.5, 1.0)
    return s1, s2


# --------------------------------------------------------------------------
# properties
# --------------------------------------------------------------------------

def gamma_reference_values(gamma_fn=lanczos_gamma):
    """Lanczos Gamma against sqrt(pi) anchors and math.gamma on (0, 5)."""
    anchors = [
        (0.5, math.sqrt(math.pi)),
        (1.0, 1.0),
        (1.5, 0.5 * math.sqrt(math.pi)),
    ]
    worst = 0.0
    for x, ref in anchors:
        worst = max(worst, abs(gamma_fn(x) - ref) / ref)
    for x in np.linspace(0.05, 4.95, 99):
        worst = max(worst, abs(gamma_fn(float(x)) - math.gamma(float(x))) / math.gamma(float(x)))
    return worst <= 1e-13, f"max relative error {worst:.3e} (tolerance 1e-13)"


def exponential_integral_split():
    """Scaled E1: series/continued-fraction split against an independent
    reference at real arguments, and internal consistency at the crossover."""
    from scipy import special

    worst = 0.0
    for w in [0.01, 0.05, 0.2, 0.5, 0.9, 1.0, 1.5, 3.0, 10.0, 50.0, 300.0, 600.0]:
        ref = math.exp(w) * float(special.exp1(w))
        worst = max(worst, abs(oracles.exp_e1_scaled(w) - ref) / ref)
    # series and continued fraction must agree in an annulus around |w| = 1
    consistency = 0.0
    for phi in np.linspace(-2.8, 2.8, 15):
        w = 0.999 * np.exp(1j * phi)
        lo = oracles.exp_e1_scaled(complex(w))
        hi = oracles.exp_e1_scaled(complex(w / 0.999 * 1.001))
        consistency = max(consistency, abs(lo - hi) / abs(lo) / 0.01)
    ok = worst <= 1e-13 and consistency < 10.0
    return ok, f"real-axis max rel {worst:.3e}; crossover continuity factor {consistency:.2f}"


def density_normalization():
    """Numerically integrated total probability within 1e-10 of one."""
    from scipy import integrate

    worst = 0.0
    for d in _scenarios():
        hi = d.support_bound(1e-16)
        val = 0.0
        edges = [0.0] + [min(hi, x) for x in np.geomspace(1e-6, hi, 60)] + [hi]
        edges = sorted(set(edges))
        for a, b in zip(edges[:-1], edges[1:]):
            v, _ = integrate.quad(lambda x: float(d.profile(np.array([x]))[0]), a, b,
                                  limit=200)
            val += v
        worst = max(worst, abs(val - 1.0))
    return worst <= 1e-10, f"max |integral - 1| = {worst:.3e} (tolerance 1e-10)"


def threshold_derivative_consistency():
    """Closed-form threshold derivatives vs Richardson finite differences."""
    worst = 0.0
    for d in _scenarios():
        if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
            f = lambda x: float(d.profile(np.atleast_1d(np.float64(x)))[0])
            # analyticity radius at the threshold is the distance to the pole
            p = d.params.e0 - d.e_min
            scale = math.hypot(p, 0.5 * d.params.gamma0)
        else:
            lam = d.params.lam
            f = lambda x: float(d.profile(np.atleast_1d(np.float64(x)))[0]) / x**lam
            scale = d.params.eta_scale
        for k in (1, 2):
            ref = d.threshold_derivative(k)
            est = _richardson_onesided(f, k, h0=1e-3 * scale)
            worst = max(worst, abs(est - ref) / abs(ref))
    return worst <= 1e-6, f"max relative deviation {worst:.3e} (tolerance 1e-6)"


def _richardson_onesided(f, k, h0):
    """Derivative of order k at 0+ from nodes h..4h (0 itself excluded, the
    profile ratio can be 0/0 there), with one Richardson step."""
    def diff(h):
        if k == 1:
            # cubic through (h..4h), derivative at 0: O(h^3)
            return (-26 * f(h) + 57 * f(2 * h) - 42 * f(3 * h) + 11 * f(4 * h)) / (6 * h)
        # second derivative at 0 from the same nodes: O(h^2)
        return (3 * f(h) - 8 * f(2 * h) + 7 * f(3 * h) - 2 * f(4 * h)) / (h * h)

    d1 = diff(h0)
    d2 = diff(h0 / 2.0)
    order = 3 if k == 1 else 2
    return d2 + (d2 - d1) / (2.0**order - 1.0)


def oracle_pairwise_agreement():
    """All three oracles agree within the sum of claimed errors."""
    s1, s2 = _scenarios()
    worst = 0.0
    # threshold scenario: closed form vs slow panels
    for t in np.geomspace(0.5, 300.0, 20):
        a = oracles.power_threshold_exact(0.5, 1.0, 0.0, float(t), 1.0)
        b = oracles.slow_panel_sum(s2, float(t), 1.0, panels=1200)
        excess = abs(a.value - b.value) / (a.claimed_error + b.claimed_error)
        worst = max(worst, excess)
    # jump scenario: exponential-integral form vs slow panels
    for t in np.geomspace(5.0, 400.0, 20):
        a = oracles.lorentzian_exact(s1.params, s1.e_min, float(t), 1.0)
        b = oracles.slow_panel_sum(s1, float(t), 1.0, panels=1200)
        excess = abs(a.value - b.value) / (a.claimed_error + b.claimed_error)
        worst = max(worst, excess)
    return worst <= 1.0, f"max |difference|/(summed claims) = {worst:.3f} (must be <= 1)"


def power_threshold_oracle_equivalence():
    """Default engine against the exact threshold amplitude, 1e-8 relative."""
    s2 = _scenarios()[1]
    cfg = QuadratureConfig()
    worst = 0.0
    for t in log_grid(0.1, 1e6, 29).times:
        exact = oracles.power_threshold_exact(0.5, 1.0, 0.0, float(t), 1.0).value
        a = quadrature.amplitude(s2, float(t), 1.0, cfg)
        worst = max(worst, abs(a - exact) / abs(exact))
    return worst <= 1e-8, f"max relative deviation {worst:.3e} (tolerance 1e-8)"


def method_cross_validation():
    """The two engines agree to max(1e-9 rel, 1e-15 abs) on 100 random
    (density, t) pairs."""
    rng = np.random.default_rng(_SEED)
    cfg_de = QuadratureConfig()
    cfg_pn = QuadratureConfig(method=Method.PANEL_SERIES_ACCELERATION)
    worst = 0.0
    for i in range(100):
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
        b_de = quadrature.reduced_amplitude(d, t, cfg_de)
        b_pn = quadrature.reduced_amplitude(d, t, cfg_pn)
        tol = max(1e-9 * abs(b_de), 1e-15)
        worst = max(worst, abs(b_de - b_pn) / tol)
    return worst <= 1.0, f"max |difference|/tolerance = {worst:.3f} (must be <= 1)"


def unitarity_bound():
    """|a(t)| <= 1 + 10 rel_tol on the standard scenario grids."""
    s1, s2 = _scenarios()
    cfg = QuadratureConfig()
    worst = 0.0
    for d, grid in ((s1, log_grid(1.0, 1e6, 61)), (s2, log_grid(0.1, 1e6, 61))):
        for t in grid.times:
            worst = max(worst, abs(quadrature.amplitude(d, float(t), 1.0, cfg)))
    bound = 1.0 + 10.0 * cfg.rel_tol
    return worst <= bound, f"max |a| = {worst:.15f} (bound {bound:.15f})"


def riemann_lebesgue_envelope():
    """|a| far beyond the crossover stays below |a(t_as)|."""
    s1 = _scenarios()[0]
    t_as = dynamics.crossover_time(s1, 1.0).t_as
    cfg = QuadratureConfig()
    a_ref = abs(quadrature.amplitude(s1, t_as, 1.0, cfg))
    worst = max(abs(quadrature.amplitude(s1, float(t), 1.0, cfg))
                for t in log_grid(10 * t_as, 1e3 * t_as, 41).times)
    return worst < a_ref, f"max tail |a| = {worst:.3e} vs |a(t_as)| = {a_ref:.3e}"


def fourier_smoothness_bound():
    """t^(1+lam) |a(t)| bounded on the asymptotic grid (threshold class)."""
    s2 = _scenarios()[1]
    cfg = QuadratureConfig()
    vals = [float(t) ** 1.5 * abs(quadrature.amplitude(s2, float(t), 1.0, cfg))
            for t in log_grid(1e2, 1e6, 41).times]
    bound = max(vals)
    return bound <= 1.0 + 1e-9, f"max t^(3/2) |a| = {bound:.12f} (exact limit 1)"


def expansion_agreement_jump():
    """Two-term jump expansion within 1e-2 of quadrature past 10 t_as,
    improving decade by decade."""
    s1 = _scenarios()[0]
    cfg = QuadratureConfig()
    t_as = dynamics.crossover_time(s1, 1.0).t_as
    order = AsymptoticOrder(2)
    grid = log_grid(10 * t_as, 1e3 * t_as, 25)
    devs = []
    for t in grid.times:
        a = quadrature.amplitude(s1, float(t), 1.0, cfg)
        e = asymptotics.expansion_jump(s1, float(t), 1.0, order)
        devs.append(abs(e - a) / abs(a))
    devs = np.array(devs)
    ok = bool(np.max(devs) <= 1e-2)
    first, second = np.median(devs[: len(devs) // 2]), np.median(devs[len(devs) // 2:])
    ok = ok and second < first
    return ok, f"max deviation {np.max(devs):.3e}; decade medians {first:.2e} -> {second:.2e}"


def expansion_agreement_threshold():
    """Two-term threshold expansion within 1e-2 of quadrature for t >= 1e3."""
    s2 = _scenarios()[1]
    cfg = QuadratureConfig()
    order = AsymptoticOrder(2)
    worst = 0.0
    for t in log_grid(1e3, 1e6, 16).times:
        a = quadrature.amplitude(s2, float(t), 1.0, cfg)
        e = asymptotics.expansion_threshold(s2, float(t), 1.0, order)
        exact = oracles.power_threshold_exact(0.5, 1.0, 0.0, float(t), 1.0).value
        worst = max(worst, abs(e - a) / abs(a), abs(a - exact) / abs(exact))
    return worst <= 1e-2, f"max relative deviation {worst:.3e} (tolerance 1e-2)"


def e_min_limit():
    """Re h_infinity approaches e_min like (hbar/t)^2 on the jump grid."""
    s1 = _scenarios()[0]
    ratio = s1.threshold_derivative(1) / s1.threshold_derivative(0)
    order = AsymptoticOrder(2)
    worst = 0.0
    for t in log_grid(1e5, 1e6, 9).times:
        h = asymptotics.h_infinity(s1, float(t), 1.0, order)
        bound = 10.0 * (1.0 / float(t)) ** 2 * abs(ratio)
        worst = max(worst, abs(h.real - s1.e_min) / bound)
    return worst <= 1.0, f"max |Re h - e_min| / bound = {worst:.3f} (must be <= 1)"


def h_identity_consistency():
    """-2 Im h equals the log-derivative of survival (finite differences)."""
    s1, s2 = _scenarios()
    cfg = QuadratureConfig()
    worst = 0.0
    cases = [(s2, t) for t in (0.5, 5.0, 50.0, 5e3)] + \
            [(s1, t) for t in (150.0, 700.0, 5e4)]
    for d, t in cases:
        h = dynamics.effective_hamiltonian(d, t, 1.0, cfg)
        delta = 1e-4 * t
        lo = abs(quadrature.reduced_amplitude(d, t - delta, cfg)) ** 2
        hi = abs(quadrature.reduced_amplitude(d, t + delta, cfg)) ** 2
        gamma_fd = -(math.log(hi) - math.log(lo)) / (2 * delta)
        gamma_h = -2.0 * h.imag
        worst = max(worst, abs(gamma_fd - gamma_h) / abs(gamma_h))
    return worst <= 1e-3, f"max relative mismatch {worst:.3e} (tolerance 1e-3)"


PROPERTIES = [
    ("gamma_reference_values", gamma_reference_values),
    ("exponential_integral_split", exponential_integral_split),
    ("density_normalization", density_normalization),
    ("threshold_derivative_consistency", threshold_derivative_consistency),
    ("oracle_pairwise_agreement", oracle_pairwise_agreement),
    ("power_threshold_oracle_equivalence", power_threshold_oracle_equivalence),
    ("method_cross_validation", method_cross_validation),
    ("unitarity_bound", unitarity_bound),
    ("riemann_lebesgue_envelope", riemann_lebesgue_envelope),
    ("fourier_smoothness_bound", fourier_smoothness_bound),
    ("expansion_agreement_jump", expansion_agreement_jump),
    ("expansion_agreement_threshold", expansion_agreement_threshold),
    ("e_min_limit", e_min_limit),
    ("h_identity_consistency", h_identity_consistency),
]


def run_all(gamma_perturbation: float = 0.0, stream=None):
    """Run every property; returns (all_passed, report lines).

    ``gamma_perturbation`` is a testing hook that scales the Gamma
    implementation fed to the reference-value property by (1 + eps).
    """
    lines = []
    all_ok = True
    first_failure = None
    for name, prop in PROPERTIES:
        if name == "gamma_reference_values" and gamma_perturbation != 0.0:
            eps = gamma_perturbation
            ok, detail = prop(gamma_fn=lambda x: lanczos_gamma(x) * (1.0 + eps))
        else:
            ok, detail = prop()
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {name}: {detail}"
        lines.append(line)
        if stream is not None:
            print(line, file=stream, flush=True)
        if not ok:
            all_ok = False
            if first_failure is None:
                first_failure = name
    return all_ok, lines, first_failure
