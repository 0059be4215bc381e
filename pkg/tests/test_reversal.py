"""Tests for the reversed process, its subordinator machinery and the
composed boundary clock.

Frozen oracle facts:
* a drift-1 subordinator with jump rate sqrt(r) and Exp(sqrt(r)) jumps has
  E[H(s)] = 2 s and Laplace transform e^{-s (lam + sqrt(r) - r/(lam+sqrt(r)))};
* boundary jump sizes and zero-holding local times of the reversed process
  are both Exp(sqrt(r));
* the inverse of the composed boundary clock at level x has Laplace
  transform e^{-x lam/sqrt(lam+r)}.
"""
import math

import numpy as np
import pytest

from resetting_lab import ModelParams, RngStreamSpec
from resetting_lab import analytic
from resetting_lab.reversal import (SubordinatorPath, build_x_tilde,
                                    composed_local_time_law_check,
                                    inverse_subordinator, remaining_lifetime,
                                    sample_subordinator_psi,
                                    subordinator_level_values,
                                    x_tilde_marginal_check,
                                    xtilde_event_samples,
                                    xtilde_terminal_samples)
from resetting_lab.stats import ks_test, transform_check


def _toy_sub():
    # H(s) = s + 2*1{s>=1} + 3*1{s>=2}
    return SubordinatorPath(1.0, np.array([1.0, 2.0]), np.array([2.0, 3.0]),
                            horizon=4.0)


def test_subordinator_value_by_hand():
    s = _toy_sub()
    assert s.value(0.5) == 0.5
    assert s.value(1.0) == 3.0       # right-continuous at the jump
    assert s.value(1.5) == 3.5
    assert s.value(2.0) == 7.0
    assert s.terminal_value == 9.0
    with pytest.raises(ValueError):
        s.value(5.0)


def test_subordinator_inverse_by_hand():
    s = _toy_sub()
    # below the first jump: plain drift inversion
    assert inverse_subordinator(s, 0.7) == 0.7
    # inside the first jump gap (1, 3): inverse sticks at the jump time
    assert inverse_subordinator(s, 2.0) == 1.0
    # on the next drift stretch H in (3, 4): t = 3.5 -> s = 1.5
    assert inverse_subordinator(s, 3.5) == 1.5
    # inside the second gap (4, 7)
    assert inverse_subordinator(s, 5.0) == 2.0
    with pytest.raises(ValueError):
        s.inverse(100.0)


def test_remaining_lifetime_by_hand():
    s = _toy_sub()
    assert remaining_lifetime(s, 0.7) == 0.0       # on a drift stretch
    assert remaining_lifetime(s, 2.0) == 1.0       # gap (1,3): overshoot 3-2
    assert remaining_lifetime(s, 6.0) == 1.0       # gap (4,7)
    assert remaining_lifetime(s, 3.5) == 0.0


def test_sampled_subordinator_is_consistent():
    r = 4.0
    s = sample_subordinator_psi(r, 50.0, RngStreamSpec(2, 0))
    assert np.all(np.diff(s.jump_times) > 0)
    assert np.all(s.jump_sizes > 0)
    # round-trip: inverse then value recovers at least the level
    for t in np.linspace(0.0, s.terminal_value, 23):
        u = s.inverse(t)
        assert s.value(u) >= t - 1e-12
        assert remaining_lifetime(s, t) >= 0.0


def test_subordinator_rate_zero_is_pure_drift():
    s = sample_subordinator_psi(0.0, 5.0, RngStreamSpec(2, 1))
    assert s.jump_times.size == 0
    assert s.value(3.0) == 3.0
    assert s.inverse(2.5) == 2.5
    vals = subordinator_level_values(0.0, 1.5, RngStreamSpec(2, 2), 100)
    np.testing.assert_array_equal(vals, np.full(100, 1.5))


def test_subordinator_level_values_laplace():
    r, level, n = 2.0, 0.8, 60_000
    vals = subordinator_level_values(r, level, RngStreamSpec(3, 0), n)
    assert np.all(vals >= level)
    assert abs(np.mean(vals) - 2.0 * level) < 0.02
    for lam in (0.5, 1.5):
        target = math.exp(-level * analytic.psi(lam, r))
        rep = transform_check(vals, lam, target,
                              name=f"sub_level_laplace(lam={lam})",
                              n_sigma=4.0)
        assert rep.passed, str(rep)


def test_build_x_tilde_structure():
    p = ModelParams(r=1.0, horizon=5.0, dt=1e-3)
    rp = build_x_tilde(p, RngStreamSpec(7, 0))
    assert np.all(rp.path.values >= 0.0)
    assert np.all(np.diff(rp.composed_local_time) >= -1e-12)
    assert np.all(np.diff(rp.gamma_tilde) >= 0.0)
    ev = rp.path.events
    assert ev.boundary_jump_times.size == ev.boundary_jump_sizes.size
    assert np.all(ev.boundary_jump_sizes > 0.0)
    # the subordinator covers the accrued local time
    assert rp.subordinator.terminal_value >= rp.gamma_tilde[-1]
    # away from jumps and the boundary the value equals the underlying path
    off = rp.path.values - rp.underlying.values
    assert np.all(off >= -1e-12)


def test_build_x_tilde_rate_zero_is_reflected_bm():
    p = ModelParams(r=0.0, horizon=1.0, dt=1e-3)
    rp = build_x_tilde(p, RngStreamSpec(7, 1))
    assert rp.path.events.boundary_jump_times.size == 0
    np.testing.assert_array_equal(rp.path.values, rp.underlying.values)
    np.testing.assert_allclose(rp.composed_local_time, rp.gamma_tilde)


def test_xtilde_event_laws():
    p = ModelParams(r=1.0, horizon=50.0, dt=1e-3)
    d = xtilde_event_samples(p, RngStreamSpec(11, 0), 800)
    sr = math.sqrt(p.r)
    assert d["jump_sizes"].size > 5_000
    rep = ks_test(d["jump_sizes"], lambda y: 1.0 - np.exp(-sr * y),
                  name="xtilde_jump_sizes")
    assert rep.passed, str(rep)
    rep = ks_test(d["holding_local_times"], lambda y: 1.0 - np.exp(-sr * y),
                  name="xtilde_zero_holdings")
    assert rep.passed, str(rep)


def test_xtilde_events_require_positive_rate():
    p = ModelParams(r=0.0, horizon=10.0, dt=1e-3)
    with pytest.raises(ValueError):
        xtilde_event_samples(p, RngStreamSpec(0, 0), 10)


def test_xtilde_stationary_marginal():
    p = ModelParams(r=1.0, horizon=0.5, dt=2e-3)
    rep = x_tilde_marginal_check(p, RngStreamSpec(13, 0),
                                 lambda x: np.exp(-x),
                                 1.0 / (1.0 + 1.0 / math.sqrt(p.r)),
                                 n_paths=60_000)
    assert rep.passed, str(rep)


def test_composed_clock_inverse_law():
    p = ModelParams(r=1.0, horizon=1.0, dt=5e-4)
    rep = composed_local_time_law_check(p, RngStreamSpec(17, 0), 0.3, 1.0,
                                        n_paths=20_000)
    assert rep.passed, str(rep)
    assert rep.detail["censored"] == 0


def test_xtilde_terminal_reproducible():
    p = ModelParams(r=1.0, horizon=0.5, dt=2e-3)
    a, _ = xtilde_terminal_samples(p, RngStreamSpec(19, 0), 500)
    b, _ = xtilde_terminal_samples(p, RngStreamSpec(19, 0), 500)
    np.testing.assert_array_equal(a, b)
    assert np.all(a >= 0.0)
