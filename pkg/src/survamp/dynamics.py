"""Effective Hamiltonian, decay rate and crossover time from amplitudes.

The instantaneous description of the unstable state is the complex function
h(t) = i hbar (da/dt) / a(t): its real part is the instantaneous energy
E(t), and gamma(t) = -2 Im h(t) is the instantaneous decay rate, which also
equals the logarithmic derivative -hbar d ln P / dt of the survival
probability P(t) = |a(t)|^2.

h is always computed from the phase-factored reduced integrals,

    h(t) = e_min + w(t) / b(t),

never from raw a and da/dt: at long times E(t) - e_min is of order
(hbar/t)^2 while |h - e_min| is of order hbar/t, and the factored form keeps
that small real part above cancellation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .densities import DensityKind, EnergyDensity
from .grids import TimeGrid
from .quadrature import QuadratureConfig, QuadratureError, reduced_amplitude, weighted_amplitude

__all__ = [
    "EffectiveSample",
    "EffectiveSeries",
    "CrossoverResult",
    "KhalfinReport",
    "AmplitudeUnderflowError",
    "effective_hamiltonian",
    "effective_series",
    "crossover_time",
    "exponential_model",
    "khalfin_check",
    "energy_inequality_time",
    "gamma_from_survival",
]

UNDERFLOW_GUARD = 1e-300


class AmplitudeUnderflowError(ArithmeticError):
    """|b(t)| fell below the underflow guard; the ratio w/b is meaningless."""


@dataclass(frozen=True)
class EffectiveSample:
    """(t, E(t), gamma(t), |a(t)|^2) extracted from h(t)."""

    t: float
    e_u: float
    gamma_u: float
    survival: float


@dataclass(frozen=True)
class EffectiveSeries:
    samples: list
    errors: list = field(default_factory=list)


@dataclass(frozen=True)
class CrossoverResult:
    """Largest root of the exponential-vs-background crossover equation."""

    t_as: float
    residual: float
    bracket: tuple
    iterations: int


@dataclass(frozen=True)
class KhalfinReport:
    """Outcome of the slower-than-exponential long-time checks."""

    n_asymptotic: int
    min_log_margin: float
    exceeds_exponential: bool
    mu_fitted: float
    fit_window: tuple
    passed: bool


def effective_hamiltonian(d: EnergyDensity, t: float, hbar: float,
                          cfg: QuadratureConfig | None = None) -> complex:
    """Exact h(t) = e_min + w(t)/b(t) from the two reduced integrals."""
    if t <= 0:
        raise ValueError("t must be positive")
    b = reduced_amplitude(d, t / hbar, cfg)
    if abs(b) < UNDERFLOW_GUARD:
        raise AmplitudeUnderflowError(
            f"|b({t})| = {abs(b):.3e} is below the underflow guard {UNDERFLOW_GUARD:g}"
        )
    w = weighted_amplitude(d, t, hbar, cfg)
    return d.e_min + w / b


def effective_series(d: EnergyDensity, grid: TimeGrid, hbar: float,
                     cfg: QuadratureConfig | None = None,
                     workers: int = 1) -> EffectiveSeries:
    """One EffectiveSample per grid point; per-point failures are collected,
    not fatal (failed points are skipped and reported)."""

    def one(t):
        b = reduced_amplitude(d, t / hbar, cfg)
        if abs(b) < UNDERFLOW_GUARD:
            raise AmplitudeUnderflowError(f"|b({t})| below underflow guard")
        w = weighted_amplitude(d, t, hbar, cfg)
        h = d.e_min + w / b
        return EffectiveSample(t=float(t), e_u=float(h.real),
                               gamma_u=float(-2.0 * h.imag),
                               survival=float(abs(b) ** 2))

    samples, errors = [], []
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, t) for t in grid.times]
            for t, fut in zip(grid.times, futures):
                try:
                    samples.append(fut.result())
                except (QuadratureError, AmplitudeUnderflowError, ValueError) as exc:
                    errors.append((float(t), str(exc)))
    else:
        for t in grid.times:
            try:
                samples.append(one(t))
            except (QuadratureError, AmplitudeUnderflowError, ValueError) as exc:
                errors.append((float(t), str(exc)))
    return EffectiveSeries(samples=samples, errors=errors)


# --------------------------------------------------------------------------
# crossover between the exponential era and the power-law tail
# --------------------------------------------------------------------------

def crossover_time(d: EnergyDensity, hbar: float,
                   log_residual_tol: float = 1e-12) -> CrossoverResult:
    """Largest root t_as of  exp(-gamma0 t/hbar) = (hbar omega(e_min)/t)^2.

    Solved in log form, f(t) = -gamma0 t/hbar + 2 ln t - 2 ln(hbar omega0),
    which is monotone decreasing past its maximum at t = 2 hbar/gamma0.  The
    equation also has a spurious root at small t (both sides near one);
    bracketing starts at ten lifetimes, safely beyond it.
    """
    if d.kind is not DensityKind.TRUNCATED_LORENTZIAN:
        raise ValueError("the crossover equation uses omega(e_min) > 0 (jump class)")
    gamma0 = d.params.gamma0
    omega0 = d.evaluate(d.e_min)
    if omega0 <= 0:
        raise ValueError("density vanishes at the threshold; no jump-class crossover")

    def f(t):
        return -gamma0 * t / hbar + 2.0 * math.log(t) - 2.0 * math.log(hbar * omega0)

    lo = 10.0 * hbar / gamma0
    if f(lo) <= 0:
        raise ValueError(
            f"no exponential era: crossover function is already negative at "
            f"t = {lo:g} (ten lifetimes)"
        )
    hi = 2.0 * lo
    expansions = 0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        expansions += 1
        if expansions > 200:
            raise ValueError(
                f"no sign change found while expanding the bracket up to t = {hi:g}"
            )
    bracket = (lo, hi)
    iterations = 0
    while True:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        iterations += 1
        if abs(fm) <= log_residual_tol or (hi - lo) <= 1e-15 * mid:
            return CrossoverResult(t_as=mid, residual=abs(fm), bracket=bracket,
                                   iterations=iterations)
        if fm > 0:
            lo = mid
        else:
            hi = mid
        if iterations > 400:
            raise ValueError("bisection failed to reach the residual tolerance")


def exponential_model(e0: float, gamma0: float, t: float, hbar: float) -> complex:
    """Pure pole model exp(-i t (e0 - i gamma0/2)/hbar) of the exponential era."""
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    return complex(np.exp(-1j * t * (e0 - 0.5j * gamma0) / hbar))


# --------------------------------------------------------------------------
# long-time property checks
# --------------------------------------------------------------------------

def gamma_from_survival(times, survivals):
    """gamma(t) = -hbar d ln P/dt (hbar = 1) by central differences on an
    arbitrary strictly increasing grid.  Endpoints use one-sided stencils."""
    t = np.asarray(times, dtype=float)
    lnp = np.log(np.asarray(survivals, dtype=float))
    return -np.gradient(lnp, t)


def khalfin_check(samples, gamma0: float, hbar: float, t_as: float,
                  window_decades: float = 2.0, min_points: int = 8) -> KhalfinReport:
    """Verify the two observable consequences of the lower decay bound.

    (a) every sampled survival beyond 2 t_as exceeds the pure exponential
        exp(-gamma0 t / hbar) (compared in the log domain);
    (b) the local exponent mu = -d ln gamma / d ln t fitted over the last
        ``window_decades`` of the asymptotic samples is close to one,
        consistent with gamma(t) ~ 1/t.

    ``samples`` is a sequence of (t, survival) pairs covering t > 2 t_as.
    """
    pts = sorted((float(t), float(p)) for t, p in samples)
    tail = [(t, p) for t, p in pts if t > 2.0 * t_as]
    if len(tail) < min_points:
        raise ValueError(
            f"insufficient asymptotic samples: need at least {min_points} points "
            f"beyond 2 t_as = {2.0 * t_as:g}, got {len(tail)}"
        )
    t = np.array([x[0] for x in tail])
    p = np.array([x[1] for x in tail])
    log_margin = np.log(p) - (-gamma0 * t / hbar)
    exceeds = bool(np.all(log_margin > 0))

    gamma = gamma_from_survival(t, p)
    t_hi = t[-1]
    sel = (t >= t_hi / 10.0**window_decades) & (gamma > 0)
    if np.count_nonzero(sel) < 4:
        raise ValueError("insufficient samples in the exponent fit window")
    slope = np.polyfit(np.log(t[sel]), np.log(gamma[sel]), 1)[0]
    mu = -float(slope)
    passed = exceeds and abs(mu - 1.0) < 0.05
    return KhalfinReport(
        n_asymptotic=len(tail),
        min_log_margin=float(np.min(log_margin)),
        exceeds_exponential=exceeds,
        mu_fitted=mu,
        fit_window=(float(t_hi / 10.0**window_decades), float(t_hi)),
        passed=passed,
    )


def energy_inequality_time(d: EnergyDensity, grid: TimeGrid, hbar: float,
                           e_u0: float, cfg: QuadratureConfig | None = None,
                           series: EffectiveSeries | None = None) -> float:
    """Smallest grid time beyond which E(t) < e_u0 for all later grid points.

    For jump-class densities the certificate is anchored at the crossover
    time (t_inf >= t_as); the grid must reach it.  A precomputed series over
    the same grid may be supplied to avoid recomputation.
    """
    if series is None:
        series = effective_series(d, grid, hbar, cfg)
    if series.errors:
        raise ValueError(f"cannot certify: {len(series.errors)} grid points failed")
    samples = series.samples
    anchor = 0.0
    if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
        anchor = crossover_time(d, hbar).t_as
        if samples[-1].t < anchor:
            raise ValueError(
                f"grid ends at t = {samples[-1].t:g}, before the crossover "
                f"t_as = {anchor:g}; no asymptotic certificate possible"
            )
    t_inf = None
    for s in reversed(samples):
        if s.e_u < e_u0 and s.t >= anchor:
            t_inf = s.t
        else:
            break
    if t_inf is None:
        raise ValueError(
            f"E(t) < {e_u0:g} never holds on the asymptotic grid "
            f"(grid max t = {samples[-1].t:g})"
        )
    return float(t_inf)
