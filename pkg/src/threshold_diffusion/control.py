"""Bang-bang volatility control: maximize the chance of ending above a level.

At every instant the controller must run one of two drift/volatility pairs,
(mu_bar, sigma_bar) or (mu_low, sigma_low) with 0 < sigma_low < sigma_bar,
and wants to maximize P(X_T >= a). The optimal rule is a moving threshold:
take the high-volatility pair exactly while the state sits at or below
a + alpha (T - t), with slope

    alpha = (mu_bar sigma_low - mu_low sigma_bar) / (sigma_bar - sigma_low).

The slope makes (mu_low + alpha)/sigma_low = (mu_bar + alpha)/sigma_bar, so
after the tilt Y_t = X_t - alpha (T - t) the optimally controlled state is
an ordinary threshold diffusion and the value function reduces to one
integral of its transition density over [a, infinity).
"""

import math
from dataclasses import dataclass

import numpy as np

from .density import DensityQuery, transition_density
from .errors import AccuracyError, DomainError, InvalidParameterError
from .params import DiffusionParams
from .quadrature import QuadSettings, integrate_finite


@dataclass(frozen=True)
class ControlProblem:
    """Two-option control problem data.

    x0 is the simulation start state for controlled Monte Carlo runs; the
    analytic value function takes the start state as an argument instead.
    """

    mu_bar: float
    sigma_bar: float
    mu_low: float
    sigma_low: float
    a: float
    T: float
    x0: float = 0.0

    def __post_init__(self):
        vals = (self.mu_bar, self.sigma_bar, self.mu_low, self.sigma_low,
                self.a, self.T, self.x0)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError(f"control problem fields must be finite, got {vals!r}")
        if not (0.0 < self.sigma_low < self.sigma_bar):
            raise InvalidParameterError(
                "volatilities must satisfy 0 < sigma_low < sigma_bar, got "
                f"sigma_low={self.sigma_low!r}, sigma_bar={self.sigma_bar!r}")
        if self.T <= 0.0:
            raise InvalidParameterError(f"horizon must be positive, got {self.T!r}")


def alpha(problem):
    """Slope of the moving switching threshold."""
    return ((problem.mu_bar * problem.sigma_low - problem.mu_low * problem.sigma_bar)
            / (problem.sigma_bar - problem.sigma_low))


def optimal_threshold(problem, t):
    """Switching level a + alpha (T - t); equals a at the horizon."""
    if not (0.0 <= t <= problem.T):
        raise DomainError(f"t must lie in [0, T]=[0, {problem.T!r}], got {t!r}")
    return problem.a + alpha(problem) * (problem.T - t)


def optimal_volatility(problem, state, t):
    """High volatility at or below the moving threshold, low above it.

    Ties at the threshold take the high-volatility pair. Accepts scalar or
    array states.
    """
    level = optimal_threshold(problem, t)
    state = np.asarray(state, dtype=float)
    out = np.where(state <= level, problem.sigma_bar, problem.sigma_low)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OptimalPolicy:
    """Callable moving-threshold policy; alpha is stored, not recomputed."""

    problem: ControlProblem
    alpha: float

    def __call__(self, states, t):
        level = self.problem.a + self.alpha * (self.problem.T - t)
        states = np.asarray(states, dtype=float)
        return np.where(states <= level, self.problem.sigma_bar, self.problem.sigma_low)


def optimal_policy(problem):
    return OptimalPolicy(problem, alpha(problem))


def constant_bar_policy(problem):
    """Always the high-volatility pair (comparison policy)."""
    s = problem.sigma_bar
    return lambda states, t: np.full_like(np.asarray(states, dtype=float), s)


def constant_low_policy(problem):
    """Always the low-volatility pair (comparison policy)."""
    s = problem.sigma_low
    return lambda states, t: np.full_like(np.asarray(states, dtype=float), s)


def reversed_threshold_policy(problem):
    """The optimal rule with the two options swapped (comparison policy)."""
    al = alpha(problem)

    def policy(states, t):
        level = problem.a + al * (problem.T - t)
        states = np.asarray(states, dtype=float)
        return np.where(states <= level, problem.sigma_low, problem.sigma_bar)
    return policy


def _equivalent_params(problem):
    """Threshold-diffusion parameters of the tilted optimally controlled state."""
    al = alpha(problem)
    return DiffusionParams(problem.mu_bar + al, problem.mu_low + al,
                           problem.sigma_bar, problem.sigma_low, problem.a), al


def value_function(problem, x, settings=None):
    """Maximal probability of finishing at or above the level a, from state x.

    Integrates the tilted transition density over [a, zmax] where zmax covers
    12 terminal standard deviations plus the largest possible drift sweep; the
    sub-Gaussian tail allowance beyond zmax joins the quadrature error. A
    result outside [0, 1] by more than 1e-4 raises AccuracyError; smaller
    excursions are clamped.
    """
    params, al = _equivalent_params(problem)
    T = problem.T
    y0 = x - al * T
    drift_span = abs(problem.mu_bar) + abs(problem.mu_low) + abs(al)
    zmax = problem.a + 12.0 * problem.sigma_bar * math.sqrt(T) + drift_span * T
    outer = settings if settings is not None else QuadSettings(
        abs_tol=1e-7, rel_tol=1e-7, max_subdivisions=400)

    def f(zs):
        return np.array([transition_density(DensityQuery(params, T, y0, z))
                         for z in np.asarray(zs, dtype=float)])

    val, err = integrate_finite(f, problem.a, zmax, settings=outer,
                                seed_points=(y0,) if problem.a < y0 < zmax else None)
    margin = (zmax - max(y0, problem.a) - drift_span * T) / (problem.sigma_bar * math.sqrt(T))
    tail = math.exp(-0.5 * margin * margin) if margin > 0 else 1.0
    err += tail
    if val < -1e-4 or val > 1.0 + 1e-4:
        raise AccuracyError(
            f"value function estimate {val!r} lies outside [0, 1] beyond tolerance",
            estimate=val, error_estimate=err)
    return min(max(val, 0.0), 1.0)
