"""Closed-form long-time expansions of the amplitude and effective Hamiltonian.

Jump-class densities (omega(e_min) > 0) give an integer inverse-power series

    b(t) ~ -(i hbar/t) sum_{k=0}^{n-1} (-1)^k (i hbar/t)^k omega0^(k),

threshold-class densities omega = (eps-e_min)^lam eta(eps) give half-integer
powers organized in bracketed alpha coefficients

    b(t) ~ (i hbar/t) lam [alpha_n + (-i hbar/t) alpha_{n-1} + ...],

    alpha_{n-k}(t) = sum_{l=0}^{n-k-1} Gamma(l+lam)/l! *
                     exp(-i pi (l+lam+2)/2) * eta0^(l+k) * (hbar/t)^(l+lam).

Note the overall sign of the bracketed expansion: with the alpha phase factor
exp(-i pi (l+lam+2)/2) as written above, the prefactor must be +(i hbar/t) lam
for the series to reproduce the exact closed-form amplitude of the canonical
lam = 1/2 density (and the stationary-phase limit of the Fourier integral);
the combination is validated against that oracle in the tests.

The long-time effective Hamiltonian follows by dividing the term-by-term time
derivative of the expansion by the expansion itself and collecting powers of
hbar/t: h(t) = e_min - c1 (hbar/t) - c2 (hbar/t)^2 - ..., with c1 = i for the
jump class and c1 = i (1+lam) for the threshold class.  The leading decay
rate -2 Im h is therefore 2 hbar/t (jump) and 2 (1+lam) hbar/t (threshold),
while Re h -> e_min in both cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densities import DensityKind, EnergyDensity

__all__ = [
    "AsymptoticOrder",
    "HInfinityCoefficients",
    "lanczos_gamma",
    "expansion_jump",
    "alpha_coefficient",
    "expansion_threshold",
    "h_infinity_coefficients",
    "h_infinity",
    "gamma_infinity",
]

MAX_ORDER = 4


@dataclass(frozen=True)
class AsymptoticOrder:
    """Number of retained expansion terms, 1..4."""

    n: int

    def __post_init__(self):
        if not (1 <= self.n <= MAX_ORDER):
            raise ValueError(f"expansion order must be in 1..{MAX_ORDER}, got {self.n}")


@dataclass(frozen=True)
class HInfinityCoefficients:
    """Coefficients c_k of h(t) = e_min - sum_k c_k (hbar/t)^k."""

    c: tuple

    def __post_init__(self):
        if not all(np.isfinite(z.real) and np.isfinite(z.imag) for z in self.c):
            raise ValueError("h-series coefficients must be finite")


# --------------------------------------------------------------------------
# Gamma function (real arguments in (0, 5) are all that is needed)
# --------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(x: float) -> float:
    """Gamma(x) for real x > 0 by the Lanczos approximation (g = 7, n = 9).

    Relative accuracy is ~1e-14 on (0, 5], ample for the expansion
    coefficients Gamma(l + lam) with l + lam < 5.
    """
    if x <= 0:
        raise ValueError("lanczos_gamma is implemented for positive real arguments")
    if x < 0.5:
        # reflection keeps the series argument in its sweet spot
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


# --------------------------------------------------------------------------
# amplitude expansions
# --------------------------------------------------------------------------

def expansion_jump(d: EnergyDensity, t: float, hbar: float,
                   order: AsymptoticOrder) -> complex:
    """Long-time amplitude for a jump-class density, n retained terms."""
    if d.kind is not DensityKind.TRUNCATED_LORENTZIAN:
        raise ValueError("jump expansion requires a density with omega(e_min) > 0")
    if t <= 0:
        raise ValueError("t must be positive")
    u = 1j * hbar / t
    acc = 0.0 + 0j
    for k in range(order.n):
        acc += (-1.0) ** k * u**k * d.threshold_derivative(k)
    return -u * np.exp(-1j * d.e_min * t / hbar) * acc


def alpha_coefficient(d: EnergyDensity, n: int, k: int, t: float, hbar: float,
                      gamma_fn=lanczos_gamma) -> complex:
    """alpha_{n-k}(t) of the threshold-class expansion, exactly as defined."""
    if d.kind is not DensityKind.POWER_THRESHOLD:
        raise ValueError("alpha coefficients are defined for threshold-class densities")
    if not (0 <= k < n):
        raise ValueError(f"alpha index out of range: need 0 <= k < n, got k={k}, n={n}")
    lam = d.params.lam
    acc = 0.0 + 0j
    for l in range(n - k):
        acc += (
            gamma_fn(l + lam) / math.factorial(l)
            * np.exp(-1j * math.pi * (l + lam + 2.0) / 2.0)
            * d.threshold_derivative(l + k)
            * (hbar / t) ** (l + lam)
        )
    return complex(acc)


def expansion_threshold(d: EnergyDensity, t: float, hbar: float,
                        order: AsymptoticOrder) -> complex:
    """Long-time amplitude for a threshold-class density, n retained orders.

    Bracket terms are (-i hbar/t)^m alpha_{n-m}, m = 0..n-1; with the alpha
    phase convention used here the global prefactor is +(i hbar/t) lam (see
    module docstring for the sign discussion).
    """
    if d.kind is not DensityKind.POWER_THRESHOLD:
        raise ValueError("threshold expansion requires a power-threshold density")
    if t <= 0:
        raise ValueError("t must be positive")
    n = order.n
    u = -1j * hbar / t
    bracket = 0.0 + 0j
    for m in range(n):
        bracket += u**m * alpha_coefficient(d, n, m, t, hbar)
    return (1j * hbar / t) * d.params.lam * np.exp(-1j * d.e_min * t / hbar) * bracket


# --------------------------------------------------------------------------
# effective-Hamiltonian asymptotics
# --------------------------------------------------------------------------

def _series_divide(num, den, terms):
    """Coefficients of num(s)/den(s) as power series, den[0] != 0."""
    q = []
    for m in range(terms):
        acc = num[m] if m < len(num) else 0.0
        for j in range(1, m + 1):
            dj = den[j] if j < len(den) else 0.0
            acc -= dj * q[m - j]
        q.append(acc / den[0])
    return q


def h_infinity_coefficients(d: EnergyDensity, order: AsymptoticOrder,
                            gamma_fn=lanczos_gamma) -> HInfinityCoefficients:
    """c_1..c_n of h(t) = e_min - sum c_k (hbar/t)^k for either class.

    Obtained by dividing the term-by-term time derivative of the amplitude
    expansion by the expansion itself and collecting powers of hbar/t; no
    stored constants.
    """
    n = order.n
    if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
        # b ~ sum_k omega0^(k) u^{k+1},  u = -i hbar/t;
        # i hbar b' ~ -sum_k (k+1) omega0^(k) u^k (hbar/t)^2 = sum (k+1) w^(k) u^{k+2}
        den = [d.threshold_derivative(k) + 0j for k in range(n)]
        num = [(k + 1) * d.threshold_derivative(k) + 0j for k in range(n)]
        r = _series_divide(num, den, n)
        # h - e_min = u * ratio(u);  convert u^m -> (-i)^m (hbar/t)^m
        c = tuple(-r[m - 1] * (-1j) ** m for m in range(1, n + 1))
        return HInfinityCoefficients(c=c)
    lam = d.params.lam
    # b ~ sum_j b_j s^{j+lam+1}, s = hbar/t
    b = [
        d.threshold_derivative(j) / math.factorial(j)
        * gamma_fn(j + lam + 1.0)
        * np.exp(-1j * math.pi * (j + lam + 1.0) / 2.0)
        for j in range(n)
    ]
    # i hbar b' ~ -i sum_j (j + lam + 1) b_j s^{j+lam+2}
    num = [-1j * (j + lam + 1.0) * b[j] for j in range(n)]
    r = _series_divide(num, b, n)
    # h - e_min = s * ratio(s) = -sum c_k s^k
    c = tuple(-r[m - 1] for m in range(1, n + 1))
    return HInfinityCoefficients(c=c)


def h_infinity(d: EnergyDensity, t: float, hbar: float,
               order: AsymptoticOrder) -> complex:
    """Asymptotic effective Hamiltonian h(t) to n terms beyond e_min.

    Jump class: e_min - i hbar/t - (omega0'/omega0)(hbar/t)^2 + ...;
    threshold class: e_min - c1 hbar/t - c2 (hbar/t)^2 - ... with the c_k
    from :func:`h_infinity_coefficients` (c1 = i (1 + lam)).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    coeffs = h_infinity_coefficients(d, order)
    s = hbar / t
    value = d.e_min + 0j
    for k, ck in enumerate(coeffs.c, start=1):
        value -= ck * s**k
    return complex(value)


def gamma_infinity(t: float, hbar: float, density_class: DensityKind,
                   lam: float | None = None) -> float:
    """Leading long-time decay rate: 2 hbar/t for the jump class,
    2 (1 + lam) hbar/t for the threshold class."""
    if t <= 0:
        raise ValueError("t must be positive")
    if density_class is DensityKind.TRUNCATED_LORENTZIAN:
        return 2.0 * hbar / t
    if lam is None:
        raise ValueError("threshold class requires the exponent lam")
    return 2.0 * (1.0 + lam) * hbar / t
