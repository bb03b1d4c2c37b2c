"""q-harmonic functions and exit-time Laplace transforms.

The decreasing solution g_minus and increasing solution g_plus of
(1/2) sigma(x)^2 g'' + mu(x) g' = q g are piecewise exponentials glued
C^1 at the threshold. All ratios are formed in log space so that states
hundreds of units from the threshold stay finite.
"""

import math
from dataclasses import dataclass

from .errors import DegenerateIntervalError, DomainError
from .params import deltas


def _check_q(q):
    if not (math.isfinite(q) and q > 0):
        raise DomainError(f"q must be positive, got {q!r}")


@dataclass(frozen=True)
class GPair:
    """Log-space evaluators for the pair (g_minus, g_plus) at a fixed rate q."""

    params: object
    q: float

    def __post_init__(self):
        _check_q(self.q)
        object.__setattr__(self, "_d", deltas(self.params, self.q))

    def log_g_minus_at(self, x):
        d = self._d
        s = x - self.params.a
        if s <= 0.0:
            # (1-c_minus) + c_minus*exp((d1m+d1p)*s) >= min(1, 1-c_minus) > 0
            return -d.d1_plus * s + math.log(
                (1.0 - d.c_minus) + d.c_minus * math.exp((d.d1_minus + d.d1_plus) * s))
        return -d.d2_plus * s

    def log_g_plus_at(self, x):
        d = self._d
        s = x - self.params.a
        if s <= 0.0:
            return d.d1_minus * s
        return d.d2_minus * s + math.log(
            (1.0 - d.c_plus) + d.c_plus * math.exp(-(d.d2_minus + d.d2_plus) * s))

    def g_minus_at(self, x):
        return math.exp(self.log_g_minus_at(x))

    def g_plus_at(self, x):
        return math.exp(self.log_g_plus_at(x))


def g_minus(params, q, x):
    """Decreasing q-harmonic function, normalized to 1 at the threshold."""
    return GPair(params, q).g_minus_at(x)


def g_plus(params, q, x):
    """Increasing q-harmonic function, normalized to 1 at the threshold."""
    return GPair(params, q).g_plus_at(x)


@dataclass(frozen=True)
class ExitQuery:
    """Two-sided exit problem: start at x inside [y, z], rate q > 0."""

    params: object
    q: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        _check_q(self.q)
        if not (self.y <= self.x <= self.z):
            raise DomainError(
                f"levels must satisfy y <= x <= z, got y={self.y!r}, x={self.x!r}, z={self.z!r}")


def two_sided_exit(query):
    """Laplace transforms of the two-sided exit time split by exit side.

    Returns (down_lt, up_lt) where down_lt = E_x[exp(-q T_y); T_y < T_z] and
    up_lt = E_x[exp(-q T_z); T_z < T_y]. Both lie in [0, 1] and sum to at
    most 1; the q-killing already encodes paths that never exit.
    """
    if query.y == query.z:
        raise DegenerateIntervalError(f"interval [{query.y!r}, {query.z!r}] is degenerate")
    if query.x == query.y:
        return 1.0, 0.0
    if query.x == query.z:
        return 0.0, 1.0
    g = GPair(query.params, query.q)
    lmx, lpx = g.log_g_minus_at(query.x), g.log_g_plus_at(query.x)
    lmy, lpy = g.log_g_minus_at(query.y), g.log_g_plus_at(query.y)
    lmz, lpz = g.log_g_minus_at(query.z), g.log_g_plus_at(query.z)

    # denominator g-(y)g+(z) - g-(z)g+(y) is positive: g- decreasing, g+ increasing
    d1, d2 = lmy + lpz, lmz + lpy
    md = max(d1, d2)
    den = math.exp(d1 - md) - math.exp(d2 - md)
    if den <= 1e-300:
        raise DegenerateIntervalError(
            "two-sided exit denominator underflowed; levels are numerically indistinguishable")

    n1, n2 = lpz + lmx, lmz + lpx
    mn = max(n1, n2)
    down = math.exp(mn - md) * (math.exp(n1 - mn) - math.exp(n2 - mn)) / den

    n1, n2 = lpy + lmx, lmy + lpx
    mn = max(n1, n2)
    # up transform has the mirrored determinant, hence the sign flip
    up = -math.exp(mn - md) * (math.exp(n1 - mn) - math.exp(n2 - mn)) / den

    return min(max(down, 0.0), 1.0), min(max(up, 0.0), 1.0)


def one_sided_down(params, q, x, y):
    """E_x[exp(-q T_y)] for a level y <= x, as the ratio g_minus(x)/g_minus(y)."""
    if y > x:
        raise DomainError(f"one_sided_down requires y <= x, got y={y!r} > x={x!r}")
    if y == x:
        return 1.0
    g = GPair(params, q)
    return math.exp(g.log_g_minus_at(x) - g.log_g_minus_at(y))


def one_sided_up(params, q, x, z):
    """E_x[exp(-q T_z)] for a level z >= x, as the ratio g_plus(x)/g_plus(z)."""
    if z < x:
        raise DomainError(f"one_sided_up requires x <= z, got x={x!r} > z={z!r}")
    if z == x:
        return 1.0
    g = GPair(params, q)
    return math.exp(g.log_g_plus_at(x) - g.log_g_plus_at(z))
