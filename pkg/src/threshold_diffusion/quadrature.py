"""Adaptive Gauss-Kronrod quadrature tuned for the library's kernel integrals.

Integrands are evaluated on whole panels at once, so callables passed to
this module must accept a 1-d ndarray and return an array of the same
shape. Panels are open: no integrand is ever evaluated exactly at a
domain endpoint.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, IntegrandError, InvalidParameterError

# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
# (odd-indexed nodes). Standard QUADPACK constants.
_XGK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])

_REFINE_BATCH = 8


@dataclass(frozen=True)
class QuadSettings:
    """Tolerances and budgets for the adaptive integrators."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    max_subdivisions: int = 2000
    truncation_epsilon: float = 1e-12

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise InvalidParameterError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not (self.rel_tol > 0):
            raise InvalidParameterError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if self.max_subdivisions < 1:
            raise InvalidParameterError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}")
        if not (self.truncation_epsilon > 0):
            raise InvalidParameterError(
                f"truncation_epsilon must be positive, got {self.truncation_epsilon!r}")


_DEFAULT = QuadSettings()


def _panel_sums(f, los, his):
    """Evaluate GK15 on a batch of panels with a single integrand call."""
    los = np.asarray(los, dtype=float)
    his = np.asarray(his, dtype=float)
    centers = 0.5 * (los + his)
    halves = 0.5 * (his - los)
    nodes = centers[:, None] + halves[:, None] * _XGK[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        bad = nodes.ravel()[~np.isfinite(vals.ravel())][0]
        raise IntegrandError(f"integrand returned a non-finite value near x={bad!r}")
    kron = (vals * _WGK).sum(axis=1) * halves
    gauss = (vals[:, 1::2] * _WG).sum(axis=1) * halves
    return kron, np.abs(kron - gauss)


def integrate_finite(f, lo, hi, settings=None, seed_points=None):
    """Adaptively integrate f over [lo, hi].

    Parameters
    ----------
    f : callable
        Vectorized integrand; called with a 1-d ndarray of abscissas.
    lo, hi : float
        Finite bounds with lo <= hi. Equal bounds give (0.0, 0.0).
    settings : QuadSettings, optional
    seed_points : sequence of float, optional
        Interior points forced to be panel boundaries (used to respect
        known kinks or boundary layers).

    Returns
    -------
    (value, error_estimate) with error_estimate <= max(abs_tol, rel_tol*|value|),
    or raises AccuracyError once the subdivision budget is exhausted.
    """
    s = settings if settings is not None else _DEFAULT
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"bounds must be finite, got [{lo!r}, {hi!r}]")
    if lo > hi:
        raise DomainError(f"lo must be <= hi, got [{lo!r}, {hi!r}]")
    if lo == hi:
        return 0.0, 0.0

    bounds = [lo]
    for p in sorted(set(float(p) for p in (seed_points or []))):
        if lo < p < hi and p > bounds[-1]:
            bounds.append(p)
    bounds.append(hi)

    kron, err = _panel_sums(f, bounds[:-1], bounds[1:])
    total = float(kron.sum())
    total_err = float(err.sum())
    heap = []
    counter = 0
    for i in range(len(kron)):
        heapq.heappush(heap, (-err[i], counter, bounds[i], bounds[i + 1],
                              float(kron[i]), float(err[i])))
        counter += 1
    n_sub = len(kron)
    stuck_err = 0.0  # error locked in panels too narrow to bisect

    while True:
        target = max(s.abs_tol, s.rel_tol * abs(total))
        if total_err <= target:
            return total, total_err
        if n_sub >= s.max_subdivisions or not heap:
            raise AccuracyError(
                f"integrate_finite: {total_err:.3e} > {target:.3e} after "
                f"{n_sub} subdivisions", estimate=total, error_estimate=total_err)
        # refine the worst panels in one batched evaluation
        split_los, split_his = [], []
        while heap and len(split_los) < _REFINE_BATCH:
            _, _, plo, phi, pk, pe = heapq.heappop(heap)
            mid = 0.5 * (plo + phi)
            if mid <= plo or mid >= phi:
                stuck_err += pe  # cannot be bisected further
                if stuck_err > target:
                    raise AccuracyError(
                        "integrate_finite: residual error trapped in panels at "
                        "machine width", estimate=total, error_estimate=total_err)
                continue
            total -= pk
            total_err -= pe
            split_los.extend([plo, mid])
            split_his.extend([mid, phi])
        if not split_los:
            continue
        kron, err = _panel_sums(f, split_los, split_his)
        total += float(kron.sum())
        total_err += float(err.sum())
        for i in range(len(kron)):
            heapq.heappush(heap, (-err[i], counter, split_los[i], split_his[i],
                                  float(kron[i]), float(err[i])))
            counter += 1
        n_sub += len(kron)


def integrate_semi_infinite(f, lo, decay_rate_hint, settings=None):
    """Integrate f over [lo, inf) assuming an eventual C*exp(-rate*u) envelope.

    The hint fixes the truncation point: the domain is cut where the
    implied tail bound drops below truncation_epsilon, with the envelope
    constant estimated from probe evaluations. The measured tail bound
    |f(u*)|/rate is folded into the returned error estimate, and the
    domain is extended if that bound is still too large.
    """
    s = settings if settings is not None else _DEFAULT
    if not (math.isfinite(decay_rate_hint) and decay_rate_hint > 0):
        raise DomainError(f"decay_rate_hint must be positive, got {decay_rate_hint!r}")
    if not math.isfinite(lo):
        raise DomainError(f"lo must be finite, got {lo!r}")
    rate = float(decay_rate_hint)
    eps = s.truncation_epsilon

    probe_offsets = np.array([0.125, 0.5, 1.0, 2.0, 4.0]) / rate
    probes = lo + probe_offsets
    pv = np.asarray(f(probes), dtype=float)
    if not np.all(np.isfinite(pv)):
        raise IntegrandError("integrand returned a non-finite value at a probe point")
    with np.errstate(over="ignore"):
        env = np.abs(pv) * np.exp(rate * probe_offsets)
    c_env = float(np.max(env)) if np.any(env > 0) else 0.0

    if c_env > 0:
        span = math.log(c_env / (eps * rate)) / rate
    else:
        span = 0.0
    span = min(max(span, 4.0 / rate), 2000.0 / rate)

    seeds = []
    w = 0.5 / rate
    while w < span:
        seeds.append(lo + w)
        w *= 2.0
    value, err = integrate_finite(f, lo, lo + span, s, seed_points=seeds)
    hi = lo + span

    for _ in range(64):
        tail = abs(float(np.asarray(f(np.array([hi])), dtype=float)[0])) / rate
        target = max(s.abs_tol, s.rel_tol * abs(value))
        if tail <= max(eps, 0.5 * target):
            return value, err + tail
        v2, e2 = integrate_finite(f, hi, hi + span, s)
        value += v2
        err += e2
        hi += span
    raise AccuracyError(
        f"integrate_semi_infinite: tail bound never fell below tolerance by u={hi!r}",
        estimate=value, error_estimate=err)


def _h_mode(y, nu):
    """Location of the mass of s -> h(s; y, nu); sets the boundary-layer scale."""
    if y <= 0:
        return math.inf
    if abs(nu) < 1e-12:
        return y * y / 3.0
    ny2 = nu * nu
    return (-3.0 + math.sqrt(9.0 + 4.0 * ny2 * y * y)) / (2.0 * ny2)


def _layer_seeds(t, scale):
    """Geometric panel boundaries resolving a boundary layer of the given scale."""
    if not math.isfinite(scale):
        return []
    s = max(scale / 4.0, t * 1e-13)
    out = []
    while s < 0.5 * t:
        out.append(s)
        s *= 4.0
    return out


def _convolve_batch(t, x1, mu1, x2, mu2, log_scale=0.0, settings=None):
    """Batched exp(log_scale) * integral_0^t h(t-tau; x1_i, mu1) h(tau; x2_i, mu2) dtau.

    x1, x2 (and optionally log_scale) are broadcast to a common batch shape;
    the tau panels are shared across the batch and refined until every batch
    element meets the tolerance. Returns (values, error_estimates).
    """
    s = settings if settings is not None else _DEFAULT
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    x1, x2 = np.broadcast_arrays(x1, x2)
    ls = np.broadcast_to(np.asarray(log_scale, dtype=float), x1.shape)
    if np.any(x1 < 0) or np.any(x2 < 0):
        raise DomainError("convolution displacements must be nonnegative")
    n = x1.shape[0]

    def kernel(tau):
        # fused product of the two kernels; exponents combined before exp so the
        # log_scale shift can never overflow on its own
        rem = t - tau
        expo = (ls[:, None]
                - (x1[:, None] + mu1 * rem[None, :]) ** 2 / (2.0 * rem[None, :])
                - (x2[:, None] + mu2 * tau[None, :]) ** 2 / (2.0 * tau[None, :]))
        pref = (x1[:, None] * x2[:, None]) / (2.0 * np.pi * (rem * tau)[None, :] ** 1.5)
        with np.errstate(under="ignore"):
            return pref * np.exp(expo)

    # boundary layers: the x1 kernel concentrates where t - tau is at its mode
    # scale, the x2 kernel where tau is; they shrink like displacement^2
    pos1 = x1[x1 > 0]
    pos2 = x2[x2 > 0]
    seeds = []
    if pos1.size:
        for w in _layer_seeds(t, _h_mode(float(pos1.min()), mu1)):
            seeds.append(t - w)
    if pos2.size:
        seeds.extend(_layer_seeds(t, _h_mode(float(pos2.min()), mu2)))

    bounds = [0.0]
    for p in sorted(set(seeds)):
        if 0.0 < p < t and p > bounds[-1] * (1 + 1e-12):
            bounds.append(p)
    bounds.append(t)

    def panel_sums(los, his):
        los = np.asarray(los, dtype=float)
        his = np.asarray(his, dtype=float)
        centers = 0.5 * (los + his)
        halves = 0.5 * (his - los)
        nodes = centers[:, None] + halves[:, None] * _XGK[None, :]
        vals = kernel(nodes.ravel())  # (n, P*15)
        if not np.all(np.isfinite(vals)):
            raise IntegrandError("convolution integrand returned a non-finite value")
        vals = vals.reshape(n, len(los), 15)
        kron = (vals * _WGK).sum(axis=2) * halves  # (n, P)
        gauss = (vals[:, :, 1::2] * _WG).sum(axis=2) * halves
        return kron, np.abs(kron - gauss)

    kron, err = panel_sums(bounds[:-1], bounds[1:])
    totals = kron.sum(axis=1)
    tot_err = err.sum(axis=1)
    heap = []
    counter = 0
    for j in range(kron.shape[1]):
        pe = float(err[:, j].max())
        heapq.heappush(heap, (-pe, counter, bounds[j], bounds[j + 1],
                              kron[:, j].copy(), err[:, j].copy()))
        counter += 1
    n_sub = kron.shape[1]

    while True:
        allowed = np.maximum(s.abs_tol, s.rel_tol * np.abs(totals))
        if np.all(tot_err <= allowed):
            return totals, tot_err
        if n_sub >= s.max_subdivisions or not heap:
            raise AccuracyError(
                f"convolution quadrature: worst residual {float(tot_err.max()):.3e} "
                f"after {n_sub} subdivisions",
                estimate=totals, error_estimate=tot_err)
        split_los, split_his = [], []
        while heap and len(split_los) < _REFINE_BATCH:
            _, _, plo, phi, pk, pe = heapq.heappop(heap)
            mid = 0.5 * (plo + phi)
            if mid <= plo or mid >= phi:
                continue
            totals = totals - pk
            tot_err = tot_err - pe
            split_los.extend([plo, mid])
            split_his.extend([mid, phi])
        if not split_los:
            raise AccuracyError(
                "convolution quadrature: residual error trapped at machine width",
                estimate=totals, error_estimate=tot_err)
        kron, err = panel_sums(split_los, split_his)
        totals = totals + kron.sum(axis=1)
        tot_err = tot_err + err.sum(axis=1)
        for j in range(kron.shape[1]):
            pe = float(err[:, j].max())
            heapq.heappush(heap, (-pe, counter, split_los[j], split_his[j],
                                  kron[:, j].copy(), err[:, j].copy()))
            counter += 1
        n_sub += kron.shape[1]


def convolve_h_pair(t, x1, mu1, x2, mu2, settings=None, log_scale=0.0):
    """Time convolution of two first-passage kernels over (0, t).

    Returns exp(log_scale) * integral_0^t h(t-tau; x1, mu1) h(tau; x2, mu2) dtau.
    Vanishes when x1 = 0 or x2 = 0; for mu1 = mu2 = mu and positive
    displacements it reproduces h(t; x1+x2, mu).
    """
    if x1 == 0.0 or x2 == 0.0:
        return 0.0
    values, _ = _convolve_batch(t, x1, mu1, x2, mu2, log_scale=log_scale,
                                settings=settings)
    return float(values[0])
