"""Tests for the boundary trace samplers and the subordination oracle.

Frozen oracle facts:
* the trace value at trace time t has characteristic function
  e^{-t xi^2/sqrt(xi^2+r)}; at r = 0 that is the standard Cauchy scaling
  e^{-t |xi|};
* the clock behind the trace has mean -d/dlam e^{-t phi(lam)}|_0 = t something
  finite for r > 0 (checked against the truncated compound-Poisson clock);
* the two constructions (resetting vertical motion and drifted vertical
  motion with a subordinated clock) give the same trace law.
"""
import math

import numpy as np
import pytest
from scipy import stats as sps

from resetting_lab import ModelParams, RngStreamSpec
from resetting_lab.trace import (TraceSampleSet, _tail_inverse_table,
                                 clock_mean_check, sample_trace,
                                 trace_cf_target,
                                 truncated_levy_trace_oracle)
from resetting_lab.stats import (ks_test, transform_check,
                                 two_sample_ks_test)


def test_cf_target_values():
    assert trace_cf_target(0.0, 1.0, 2.0) == 1.0
    # r = 0 reduces to the Cauchy characteristic function
    for xi in (0.5, 1.0, 3.0):
        assert math.isclose(trace_cf_target(xi, 0.7, 0.0),
                            math.exp(-0.7 * abs(xi)), rel_tol=1e-12)
    # frozen value: xi=1, t=1, r=3 -> exp(-1/2)
    assert math.isclose(trace_cf_target(1.0, 1.0, 3.0), math.exp(-0.5),
                        rel_tol=1e-12)
    with pytest.raises(ValueError):
        trace_cf_target(1.0, 0.0, 1.0)


def test_tail_inverse_table_is_consistent():
    u, z = _tail_inverse_table(1.0, 1e-6)
    assert np.all(np.diff(u) > 0) and np.all(np.diff(z) < 0)
    # endpoints: u=1 at z=eps_cut
    assert math.isclose(u[-1], 1.0) and math.isclose(z[-1], 1e-6)


def test_trace_constructions_agree_and_match_cf():
    p = ModelParams(r=1.0, horizon=1.0, dt=1e-3)
    t_tr = 0.5
    s1 = sample_trace("T1", p, RngStreamSpec(3, 0), t_tr, 30_000)
    s2 = sample_trace("T2", p, RngStreamSpec(3, 1), t_tr, 30_000)
    assert s1.n_censored == 0 and s2.n_censored == 0
    rep = two_sample_ks_test(s1.values, s2.values, name="trace_T1_vs_T2")
    assert rep.passed, str(rep)
    for s in (s1, s2):
        for xi in (0.5, 1.0, 2.0):
            rep = transform_check(s.values, xi,
                                  trace_cf_target(xi, t_tr, p.r),
                                  name=f"cf({s.which},xi={xi})", kind="char",
                                  n_sigma=4.0)
            assert rep.passed, str(rep)


def test_trace_matches_subordination_oracle():
    p = ModelParams(r=1.0, horizon=1.0, dt=1e-3)
    t_tr = 0.5
    s1 = sample_trace("T1", p, RngStreamSpec(5, 0), t_tr, 30_000)
    orc = truncated_levy_trace_oracle(p.r, t_tr, 1e-6, RngStreamSpec(5, 1),
                                      30_000)
    rep = two_sample_ks_test(s1.values, orc.values, name="trace_vs_oracle")
    assert rep.passed, str(rep)


def test_trace_cauchy_at_no_reset():
    p = ModelParams(r=0.0, horizon=1.0, dt=1e-3)
    t_tr = 1.0
    s = sample_trace("T1", p, RngStreamSpec(7, 0), t_tr, 20_000)
    assert s.n_censored <= 20_000 // 500
    rep = ks_test(s.values, lambda y: sps.cauchy.cdf(y, scale=t_tr),
                  name="trace_cauchy")
    assert rep.passed, str(rep)


def test_clock_mean_matches_transform_derivative():
    mean, se, target = clock_mean_check(1.0, 0.5, 1e-6,
                                        RngStreamSpec(9, 0), 50_000)
    assert abs(mean - target) <= 4.0 * se


def test_oracle_input_validation():
    with pytest.raises(ValueError):
        truncated_levy_trace_oracle(1.0, 0.5, 0.5, RngStreamSpec(0, 0), 10)
    with pytest.raises(ValueError):
        sample_trace("T3", ModelParams(r=1.0, horizon=1.0, dt=1e-3),
                     RngStreamSpec(0, 0), 0.5, 10)
    with pytest.raises(ValueError):
        sample_trace("T1", ModelParams(r=1.0, horizon=1.0, dt=1e-3),
                     RngStreamSpec(0, 0), -1.0, 10)
