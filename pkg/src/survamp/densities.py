"""Energy densities of an unstable state.

An admissible density ``omega(eps)`` vanishes below a spectral threshold
``e_min``, is nonnegative above it, and integrates to one.  Two families are
implemented:

* a truncated Lorentzian (Breit-Wigner) line, which is discontinuous at the
  threshold (``omega(e_min) > 0``, the "jump" class), and
* a power-law threshold density ``(eps - e_min)^lam * eta(eps)`` with
  ``0 < lam < 1`` and a smooth exponential profile
  ``eta(eps) = C exp(-(eps - e_min)/Lam)`` (the "threshold" class).

Normalization constants are closed form, so that numerically integrating the
density is an independent check rather than a self-fulfilling one.  Both
families expose the exact one-sided derivatives at the threshold that the
long-time expansions consume, and the analytic continuation of the reduced
profile ``omega(e_min + x)`` into the lower half of the complex x-plane that
the rotated-contour quadrature uses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DensityKind",
    "LorentzianParams",
    "PowerThresholdParams",
    "EnergyDensity",
    "make_lorentzian",
    "make_power_threshold",
]

MAX_DERIVATIVE_ORDER = 4

_PI_LONGDOUBLE = np.longdouble("3.14159265358979323846264338327950288420")


class DensityKind(enum.Enum):
    TRUNCATED_LORENTZIAN = "truncated_lorentzian"
    POWER_THRESHOLD = "power_threshold"


@dataclass(frozen=True)
class LorentzianParams:
    """Peak position ``e0`` (> e_min) and full width ``gamma0`` (> 0)."""

    e0: float
    gamma0: float


@dataclass(frozen=True)
class PowerThresholdParams:
    """Threshold exponent ``lam`` in (0, 1), profile scale ``eta_scale`` (> 0)
    and amplitude ``eta_amplitude`` of eta(eps) = eta_amplitude *
    exp(-(eps - e_min)/eta_scale)."""

    lam: float
    eta_scale: float
    eta_amplitude: float


@dataclass(frozen=True)
class EnergyDensity:
    """Immutable energy density; all operations are pure."""

    kind: DensityKind
    e_min: float
    params: LorentzianParams | PowerThresholdParams
    norm_constant: float

    # ------------------------------------------------------------------ eval

    def evaluate(self, eps):
        """Density value at energy ``eps`` (scalar or array); 0 below e_min."""
        eps = np.asarray(eps, dtype=np.result_type(eps, np.float64))
        x = eps - eps.dtype.type(self.e_min)
        out = np.where(x >= 0, self.profile(np.where(x >= 0, x, 0)), 0.0)
        if out.ndim == 0:
            return float(out)
        return out

    def profile(self, x):
        """Reduced profile ``omega(e_min + x)`` for x >= 0 (vectorized).

        Accepts float64 or longdouble arrays and preserves the dtype, which
        the extended-precision panel quadrature relies on.
        """
        x = np.asarray(x)
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            one = x.dtype.type(1)
            pi = _PI_LONGDOUBLE if x.dtype == np.longdouble else x.dtype.type(np.pi)
            p = x.dtype.type(self.params.e0) - x.dtype.type(self.e_min)
            g = x.dtype.type(0.5) * x.dtype.type(self.params.gamma0)
            k = x.dtype.type(self.norm_constant) * x.dtype.type(self.params.gamma0) / (2 * pi)
            return k * one / ((x - p) ** 2 + g**2)
        lam = x.dtype.type(self.params.lam)
        c = x.dtype.type(self.norm_constant)
        scale = x.dtype.type(self.params.eta_scale)
        return c * np.power(x, lam) * np.exp(-x / scale)

    def profile_complex(self, z):
        """Analytic continuation of :meth:`profile` (principal branch)."""
        z = np.asarray(z, dtype=complex)
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            p = self.params.e0 - self.e_min
            g = 0.5 * self.params.gamma0
            k = self.norm_constant * self.params.gamma0 / (2.0 * np.pi)
            return k / ((z - p) ** 2 + g**2)
        lam = self.params.lam
        with np.errstate(invalid="ignore"):
            zp = np.where(z == 0, 0.0, z) ** lam
        return self.norm_constant * zp * np.exp(-z / self.params.eta_scale)

    # ------------------------------------------------- threshold derivatives

    def threshold_derivative(self, k: int) -> float:
        """One-sided derivative data at the threshold, in closed form.

        For the truncated Lorentzian this is ``omega^(k)(e_min+)``; for the
        power-threshold family it is ``eta^(k)(e_min)`` (the caller pairs it
        with the exponent ``lam``).  Supported orders are 0..4.
        """
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError(f"derivative order must be a nonnegative integer, got {k!r}")
        if k > MAX_DERIVATIVE_ORDER:
            raise ValueError(
                f"unsupported derivative order {k}; closed forms are provided up to "
                f"order {MAX_DERIVATIVE_ORDER}"
            )
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            p = self.params.e0 - self.e_min
            g = 0.5 * self.params.gamma0
            strength = self.norm_constant * self.params.gamma0 / (2.0 * np.pi)
            # d^k/dx^k [1/((x-p)^2+g^2)] = (-1)^k k! Im[(x-p-ig)^-(k+1)]/g
            z = -p - 1j * g
            return strength * (-1.0) ** k * math.factorial(k) * (z ** (-(k + 1))).imag / g
        return self.norm_constant * (-1.0 / self.params.eta_scale) ** k

    # ---------------------------------------------------- quadrature helpers

    def steepest_direction(self, s: float) -> complex:
        """Unit ray direction in the fourth quadrant along which the
        integrand of the reduced amplitude decays without oscillating.

        The reduced amplitude integrand is ``profile(x) * exp(-i s x)``.  For
        the Lorentzian the profile is rational, so the pure Fourier factor
        fixes the descent direction ``-i``.  For the power-threshold family
        the profile carries ``exp(-x/Lam)`` and the combined exponent
        ``-(1/Lam + i s) x`` becomes real-negative along ``conj(1/Lam + i s)``.
        """
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            return -1j
        z0 = 1.0 / self.params.eta_scale + 1j * s
        return np.conj(z0) / abs(z0)

    def descent_scale(self, s: float) -> float:
        """Characteristic decay length of the rotated integrand."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            p = self.params.e0 - self.e_min
            return 1.0 / (s + 1.0 / p)
        return 1.0 / abs(1.0 / self.params.eta_scale + 1j * s)

    def contour_poles(self):
        """Poles of the reduced profile strictly inside the rotation sector
        ``-pi/2 < arg z < 0``, as (location, residue) pairs."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            p = self.params.e0 - self.e_min
            g = 0.5 * self.params.gamma0
            k = self.norm_constant * self.params.gamma0 / (2.0 * np.pi)
            return [(p - 1j * g, k / (-2j * g))]
        return []

    def resolution_scale(self) -> float:
        """Smallest feature size of the profile on the real axis."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            return 0.5 * self.params.gamma0
        return self.params.eta_scale

    def singular_points(self):
        """Real abscissae (reduced frame) needing geometric refinement."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            return [self.params.e0 - self.e_min]
        return [0.0]

    def smooth_tail_start(self) -> float:
        """Reduced abscissa beyond which the profile is monotone and smooth
        on every scale, so alternating-series acceleration is safe."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            return (self.params.e0 - self.e_min) + 30.0 * 0.5 * self.params.gamma0
        return 0.0

    def support_bound(self, tiny: float) -> float:
        """x beyond which the remaining integral of the profile is < tiny."""
        if self.kind is DensityKind.TRUNCATED_LORENTZIAN:
            k = self.norm_constant * self.params.gamma0 / (2.0 * np.pi)
            p = self.params.e0 - self.e_min
            return p + max(1.0, k / tiny)
        # integrand ~ C x^lam e^{-x/Lam}; crude inversion of the exponential
        scale = self.params.eta_scale
        return scale * (math.log(max(self.norm_constant, 1.0) / tiny) + 80.0)


def make_lorentzian(e_min: float, e0: float, gamma0: float) -> EnergyDensity:
    """Truncated Lorentzian density with closed-form normalization.

    N = 1 / (1/2 + arctan(2 (e0 - e_min)/gamma0) / pi) so that the density
    N/(2 pi) * gamma0 / ((eps - e0)^2 + (gamma0/2)^2), restricted to
    eps >= e_min, integrates to one.
    """
    if not (e0 > e_min):
        raise ValueError(f"peak energy e0={e0} must lie above the threshold e_min={e_min}")
    if not (gamma0 > 0):
        raise ValueError(f"width gamma0={gamma0} must be positive")
    norm = 1.0 / (0.5 + math.atan(2.0 * (e0 - e_min) / gamma0) / math.pi)
    return EnergyDensity(
        kind=DensityKind.TRUNCATED_LORENTZIAN,
        e_min=float(e_min),
        params=LorentzianParams(e0=float(e0), gamma0=float(gamma0)),
        norm_constant=norm,
    )


def make_power_threshold(e_min: float, lam: float, eta_scale: float) -> EnergyDensity:
    """Density ``(eps - e_min)^lam * C exp(-(eps - e_min)/eta_scale)``.

    C = 1 / (Gamma(1 + lam) * eta_scale^(1 + lam)) makes the integral one.
    """
    if not (0.0 < lam < 1.0):
        raise ValueError(f"threshold exponent lam={lam} must lie in (0, 1)")
    if not (eta_scale > 0):
        raise ValueError(f"profile scale eta_scale={eta_scale} must be positive")
    c = 1.0 / (math.gamma(1.0 + lam) * eta_scale ** (1.0 + lam))
    return EnergyDensity(
        kind=DensityKind.POWER_THRESHOLD,
        e_min=float(e_min),
        params=PowerThresholdParams(lam=float(lam), eta_scale=float(eta_scale), eta_amplitude=c),
        norm_constant=c,
    )
