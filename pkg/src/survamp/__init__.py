"""Long-time behavior of unstable quantum states.

Computes the survival amplitude a(t) of an unstable state from its energy
density, the decay law |a(t)|^2, the exact effective Hamiltonian
h(t) = i hbar (da/dt)/a with its instantaneous energy Re h and decay rate
-2 Im h, the exponential-to-power-law crossover time, and the closed-form
long-time expansions these quantities obey.
"""

from .asymptotics import (
    AsymptoticOrder,
    HInfinityCoefficients,
    alpha_coefficient,
    expansion_jump,
    expansion_threshold,
    gamma_infinity,
    h_infinity,
    h_infinity_coefficients,
    lanczos_gamma,
)
from .densities import (
    DensityKind,
    EnergyDensity,
    LorentzianParams,
    PowerThresholdParams,
    make_lorentzian,
    make_power_threshold,
)
from .dynamics import (
    AmplitudeUnderflowError,
    CrossoverResult,
    EffectiveSample,
    EffectiveSeries,
    KhalfinReport,
    crossover_time,
    effective_hamiltonian,
    effective_series,
    energy_inequality_time,
    exponential_model,
    gamma_from_survival,
    khalfin_check,
)
from .grids import TimeGrid, linear_grid, log_grid
from .oracles import (
    OracleMethod,
    OracleResult,
    exp_e1_scaled,
    lorentzian_exact,
    power_threshold_exact,
    slow_panel_sum,
)
from .quadrature import (
    Method,
    QuadratureConfig,
    QuadratureError,
    amplitude,
    reduced_amplitude,
    weighted_amplitude,
)

__version__ = "0.1.0"
