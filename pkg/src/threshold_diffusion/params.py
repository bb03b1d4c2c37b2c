"""Model parameters and the scalar kernels everything else is built from.

Regime convention used across the whole library: at state x the process
runs with drift mu1 and volatility sigma1 when x <= a, and with mu2,
sigma2 when x > a.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError

# exp() underflows to subnormal/zero near -745; beyond that the kernel is an exact 0
_EXP_UNDERFLOW = 745.0


@dataclass(frozen=True)
class DiffusionParams:
    """Threshold diffusion parameters (mu1, sigma1 below the threshold a)."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    a: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "sigma1", "sigma2", "a"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v!r}")
        if self.sigma1 <= 0:
            raise InvalidParameterError(f"sigma1 must be positive, got {self.sigma1!r}")
        if self.sigma2 <= 0:
            raise InvalidParameterError(f"sigma2 must be positive, got {self.sigma2!r}")

    def drift_at(self, x):
        """Drift coefficient at state x (vectorized)."""
        return np.where(np.asarray(x, dtype=float) <= self.a, self.mu1, self.mu2)

    def sigma_at(self, x):
        """Volatility coefficient at state x (vectorized)."""
        return np.where(np.asarray(x, dtype=float) <= self.a, self.sigma1, self.sigma2)

    def mirrored(self):
        """Parameters of the reflected process -X, which is again a threshold diffusion.

        Reflection swaps the regimes: (mu1, mu2, s1, s2, a) -> (-mu2, -mu1, s2, s1, -a).
        """
        return DiffusionParams(-self.mu2, -self.mu1, self.sigma2, self.sigma1, -self.a)

    def single_regime(self):
        return self.mu1 == self.mu2 and self.sigma1 == self.sigma2


def make_params(mu1, mu2, sigma1, sigma2, a):
    """Validated parameter object; errors name the offending field."""
    return DiffusionParams(mu1, mu2, sigma1, sigma2, a)


@dataclass(frozen=True)
class DeltaSet:
    """Exponential rates of the q-harmonic functions, plus the pasting weights.

    For regime i with drift mu_i, volatility s_i:

        d_i_plus  = (sqrt(2 q s_i^2 + mu_i^2) + mu_i) / s_i^2
        d_i_minus = (sqrt(2 q s_i^2 + mu_i^2) - mu_i) / s_i^2

    satisfying d_plus * d_minus = 2q / s^2 and
    d_plus + d_minus = 2 sqrt(2 q s^2 + mu^2) / s^2.
    c_minus, c_plus are the mixing weights that make the decreasing and
    increasing q-harmonic functions C^1 at the threshold; both 1 - c_minus
    and 1 - c_plus are strictly positive.
    """

    q: float
    d1_plus: float
    d1_minus: float
    d2_plus: float
    d2_minus: float
    c_minus: float
    c_plus: float


def _delta_pair(mu, sigma, q):
    w = math.sqrt(2.0 * q * sigma * sigma + mu * mu)
    s2 = sigma * sigma
    return (w + mu) / s2, (w - mu) / s2


def deltas(params, q):
    """Compute the DeltaSet for rate q >= 0.

    q = 0 is allowed and yields the degenerate limits d_plus = 2*max(mu,0)/s^2,
    d_minus = 2*max(-mu,0)/s^2. If a pasting-weight denominator vanishes there
    (both rates of a regime zero), the weights are evaluated at q = 1e-12.
    """
    if not math.isfinite(q):
        raise DomainError(f"q must be finite, got {q!r}")
    if q < 0:
        raise DomainError(f"q must be nonnegative, got {q!r}")
    d1p, d1m = _delta_pair(params.mu1, params.sigma1, q)
    d2p, d2m = _delta_pair(params.mu2, params.sigma2, q)

    cm_den = d1m + d1p
    cp_den = d2m + d2p
    if cm_den == 0.0 or cp_den == 0.0:
        # drift 0 and q = 0 collapse a regime's rates; take the small-q limit
        e1p, e1m = _delta_pair(params.mu1, params.sigma1, 1e-12)
        e2p, e2m = _delta_pair(params.mu2, params.sigma2, 1e-12)
        c_minus = (e1p - e2p) / (e1m + e1p)
        c_plus = (e2m - e1m) / (e2m + e2p)
    else:
        c_minus = (d1p - d2p) / cm_den
        c_plus = (d2m - d1m) / cp_den
    return DeltaSet(q, d1p, d1m, d2p, d2m, c_minus, c_plus)


def h_kernel(t, x, mu):
    """First-passage kernel h(t; x, mu) = |x|/sqrt(2 pi t^3) * exp(-(x+mu t)^2/(2t)).

    For a standard Brownian motion with drift mu started at 0 this is the
    density of the hitting time of level -x (equivalently of level |x| after
    reflecting), restricted to the event that the level is hit.

    Parameters
    ----------
    t : float or ndarray
        Time argument, must be > 0.
    x, mu : float or ndarray
        Displacement and drift, broadcast against t.

    Returns 0.0 exactly when x = 0 or when the exponent falls below the
    double-precision underflow threshold.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("h_kernel requires t > 0")
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    expo = -((x + mu * t) ** 2) / (2.0 * t)
    with np.errstate(under="ignore"):
        out = np.abs(x) / np.sqrt(2.0 * np.pi * t ** 3) * np.exp(expo)
    out = np.where(expo < -_EXP_UNDERFLOW, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def h_laplace(q, x, mu):
    """Laplace transform in t of h_kernel: exp(-(mu + sign(x) sqrt(mu^2 + 2q)) x).

    Defined for q >= 0; equals 0 at x = 0 (the kernel itself vanishes there).
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < 0.0):
        raise DomainError("h_laplace requires q >= 0")
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(under="ignore"):
        out = np.exp(-(mu + np.sign(x) * np.sqrt(mu * mu + 2.0 * q)) * x)
    out = np.where(x == 0.0, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out
