"""Bang-bang control: threshold geometry, value function, MC dominance."""

import math

import numpy as np
import pytest

from threshold_diffusion import (ControlProblem, DomainError, InvalidParameterError,
                                 alpha, constant_bar_policy, constant_low_policy,
                                 optimal_policy, optimal_threshold, optimal_volatility,
                                 simulate_policy, value_function)

SYMMETRIC = ControlProblem(0.0, 2.0, 0.0, 1.0, 0.0, 1.0, x0=0.0)
DRIFTED = ControlProblem(1.0, 2.0, -1.0, 1.0, 0.0, 1.0, x0=0.0)


def test_alpha_closed_forms():
    assert alpha(DRIFTED) == 3.0
    # proportional drifts: the threshold line is flat
    assert alpha(ControlProblem(2.0, 2.0, 1.0, 1.0, 0.0, 1.0)) == 0.0
    assert alpha(ControlProblem(2.0, 2.0, 2.0, 1.0, 0.0, 1.0)) == -2.0


def test_alpha_equalizes_slopes():
    al = alpha(DRIFTED)
    lo = (DRIFTED.mu_low + al) / DRIFTED.sigma_low
    hi = (DRIFTED.mu_bar + al) / DRIFTED.sigma_bar
    assert lo == pytest.approx(2.0, rel=1e-14)
    assert hi == pytest.approx(2.0, rel=1e-14)
    assert abs(lo - hi) <= 1e-12


@pytest.mark.parametrize("kwargs", [
    dict(sigma_low=2.0),          # not below sigma_bar
    dict(sigma_low=0.0),
    dict(sigma_bar=1.0, sigma_low=1.0),
    dict(T=0.0),
    dict(T=-1.0),
    dict(mu_bar=float("nan")),
    dict(a=float("inf")),
])
def test_problem_validation(kwargs):
    base = dict(mu_bar=1.0, sigma_bar=2.0, mu_low=-1.0, sigma_low=1.0, a=0.0, T=1.0)
    base.update(kwargs)
    with pytest.raises(InvalidParameterError):
        ControlProblem(**base)


def test_threshold_line():
    assert optimal_threshold(DRIFTED, DRIFTED.T) == 0.0
    assert optimal_threshold(DRIFTED, 0.0) == 3.0
    assert optimal_threshold(SYMMETRIC, 0.37) == 0.0
    with pytest.raises(DomainError):
        optimal_threshold(DRIFTED, -0.1)
    with pytest.raises(DomainError):
        optimal_threshold(DRIFTED, 1.1)


def test_volatility_selection():
    # far below the line: push hard; far above: lock in
    assert optimal_volatility(DRIFTED, -10.0, 0.5) == 2.0
    assert optimal_volatility(DRIFTED, 10.0, 0.5) == 1.0
    level = optimal_threshold(DRIFTED, 0.5)
    assert optimal_volatility(DRIFTED, level, 0.5) == 2.0  # tie takes high vol
    out = optimal_volatility(DRIFTED, np.array([level - 1.0, level, level + 1.0]), 0.5)
    assert np.array_equal(out, [2.0, 2.0, 1.0])


def test_optimal_policy_matches_pointwise_rule():
    pol = optimal_policy(DRIFTED)
    states = np.array([-1.0, 0.0, 1.4, 1.6, 5.0])
    assert np.array_equal(pol(states, 0.5), optimal_volatility(DRIFTED, states, 0.5))


def test_symmetric_value_at_start():
    # starting on the level with zero drifts: 2/3 chance of finishing above it
    assert value_function(SYMMETRIC, 0.0) == pytest.approx(2.0 / 3.0, abs=1e-3)


def test_value_bounds_and_monotonicity():
    xs = [-5.0, -1.0, -0.3, 0.0, 0.3, 1.0, 2.0, 3.5, 5.0]
    vals = [value_function(DRIFTED, x) for x in xs]
    assert all(0.0 <= v <= 1.0 for v in vals)
    for lo, hi in zip(vals, vals[1:]):
        assert hi >= lo - 1e-4


def test_value_translation_covariance():
    c = 2.5
    shifted = ControlProblem(1.0, 2.0, -1.0, 1.0, c, 1.0)
    for x in (-0.5, 0.0, 1.2):
        assert value_function(DRIFTED, x) == pytest.approx(
            value_function(shifted, x + c), abs=1e-8)


def test_optimal_policy_beats_constants_under_mc():
    prob = SYMMETRIC
    dt, n = 2e-3, 20_000
    runs = {}
    for name, pol, seed in (("opt", optimal_policy(prob), 5150),
                            ("bar", constant_bar_policy(prob), 5151),
                            ("low", constant_low_policy(prob), 5152)):
        ens = simulate_policy(prob, pol, dt, n, seed)
        runs[name] = ens.survival_frequency(prob.a)
    p_opt, se_opt = runs["opt"]
    assert abs(p_opt - 2.0 / 3.0) <= 3.0 * se_opt + 0.02
    for other in ("bar", "low"):
        p_alt, se_alt = runs[other]
        pooled = math.hypot(se_opt, se_alt)
        assert p_opt >= p_alt - 3.0 * pooled
