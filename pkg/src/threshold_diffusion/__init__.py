"""Numerics for one-dimensional threshold (regime-switching) diffusions.

The process follows one drift/volatility pair at or below a level a and
another pair above it. This package evaluates its exit-time Laplace
transforms, q-potential densities, transition densities, stationary law,
and the bang-bang control value function built on them, with quadrature,
Laplace inversion, and Monte Carlo cross-checks.
"""

from .control import (
    ControlProblem,
    OptimalPolicy,
    alpha,
    constant_bar_policy,
    constant_low_policy,
    optimal_policy,
    optimal_threshold,
    optimal_volatility,
    reversed_threshold_policy,
    value_function,
)
from .density import (
    DensityQuery,
    density_jump_at_threshold,
    equal_sigma_density,
    is_time_reversible,
    oscillating_bm_density,
    stationary_density,
    transition_density,
)
from .errors import (
    AccuracyError,
    DegenerateIntervalError,
    DomainError,
    IntegrandError,
    InvalidParameterError,
    NoStationaryLawError,
    PolicyError,
    ThresholdDiffusionError,
)
from .exit import (
    ExitQuery,
    g_minus,
    g_plus,
    one_sided_down,
    one_sided_up,
    two_sided_exit,
)
from .inversion import InversionSettings, invert, term_stability_gap
from .params import (
    DeltaSet,
    DiffusionParams,
    deltas,
    h_kernel,
    h_laplace,
    make_params,
)
from .potential import PotentialQuery, potential_density, potential_q_to_zero_limit
from .quadrature import (
    QuadSettings,
    convolve_h_pair,
    integrate_finite,
    integrate_semi_infinite,
)
from .simulate import (
    PathEnsemble,
    SimConfig,
    empirical_hitting_transform,
    simulate_paths,
    simulate_policy,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ControlProblem",
    "DegenerateIntervalError",
    "DeltaSet",
    "DensityQuery",
    "DiffusionParams",
    "DomainError",
    "ExitQuery",
    "IntegrandError",
    "InvalidParameterError",
    "InversionSettings",
    "NoStationaryLawError",
    "OptimalPolicy",
    "PathEnsemble",
    "PolicyError",
    "PotentialQuery",
    "QuadSettings",
    "SimConfig",
    "ThresholdDiffusionError",
    "alpha",
    "constant_bar_policy",
    "constant_low_policy",
    "convolve_h_pair",
    "deltas",
    "density_jump_at_threshold",
    "empirical_hitting_transform",
    "equal_sigma_density",
    "g_minus",
    "g_plus",
    "h_kernel",
    "h_laplace",
    "integrate_finite",
    "integrate_semi_infinite",
    "invert",
    "is_time_reversible",
    "make_params",
    "one_sided_down",
    "one_sided_up",
    "optimal_policy",
    "optimal_threshold",
    "optimal_volatility",
    "oscillating_bm_density",
    "potential_density",
    "potential_q_to_zero_limit",
    "reversed_threshold_policy",
    "simulate_paths",
    "simulate_policy",
    "stationary_density",
    "term_stability_gap",
    "transition_density",
    "two_sided_exit",
    "value_function",
]
