"""Boundary trace processes on the half-plane.

A planar process with an independent horizontal Brownian component and a
vertical reflected component, observed at the inverse boundary local time,
traces out a Lévy process on the boundary line with characteristic function
e^{-t xi^2/sqrt(xi^2+r)} — the same for the forward (resetting) and the
reversed (non-local) vertical dynamics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import analytic
from .core import ModelParams, RngStreamSpec, derive_stream, kernel_seeds
from .reversal import subordinator_level_values
from .simulate import local_time_crossing_samples


@dataclass
class TraceSampleSet:
    which: str           # {"T1", "T2", "oracle"}
    t: float             # trace time, local-time units
    values: np.ndarray   # boundary positions
    n_censored: int = 0


def trace_cf_target(xi: float, t_trace: float, r: float) -> float:
    """Characteristic function e^{-t xi^2/sqrt(xi^2+r)} of the trace value."""
    if t_trace <= 0:
        raise ValueError("t_trace must be > 0")
    if xi == 0.0:
        return 1.0
    return math.exp(-t_trace * analytic.phi(xi * xi, r))


def sample_trace(which: str, p: ModelParams, rng: RngStreamSpec,
                 t_trace: float, n_paths: int,
                 t_cap: float | None = None) -> TraceSampleSet:
    """Boundary positions of the trace process at trace time t_trace.

    Per path the vertical component is run until its boundary clock reaches
    t_trace; the horizontal Brownian value at that stopping time is Gaussian
    with variance 2*(stopping time), drawn from a disjoint stream.
    """
    if t_trace <= 0:
        raise ValueError("t_trace must be > 0")
    if which == "T1":
        rate, drift = p.r, 0.0
        levels = np.full(n_paths, t_trace)
    elif which == "T2":
        rate, drift = 0.0, -2.0 * math.sqrt(p.r)
        levels = subordinator_level_values(
            p.r, t_trace,
            RngStreamSpec(rng.master_seed, rng.stream_index + 3 * n_paths),
            n_paths)
    else:
        raise ValueError(f"unknown trace kind {which!r}")
    adapt = 0.0
    if p.r == 0.0:
        # heavy-tailed stopping times: long exact steps away from the boundary
        adapt = 0.02
        if t_cap is None:
            t_cap = 4e6 * max(t_trace, 1.0) ** 2
    if t_cap is None:
        t_cap = 400.0 * max(t_trace, 1.0) / math.sqrt(max(p.r, 1e-12))
    pp = ModelParams(r=p.r, x0=0.0, horizon=t_cap, dt=p.dt)
    taus, censored = local_time_crossing_samples(levels, pp, rng, drift, rate,
                                                 t_cap, adapt)
    taus = taus[~censored]
    horiz = derive_stream(
        RngStreamSpec(rng.master_seed, rng.stream_index + 5 * n_paths))
    values = horiz.standard_normal(taus.size) * np.sqrt(2.0 * taus)
    return TraceSampleSet(which=which, t=t_trace, values=values,
                          n_censored=int(censored.sum()))


def _tail_inverse_table(r: float, eps_cut: float):
    """Inverse of the normalized jump tail of the inverse-local-time
    subordinator on (eps_cut, z_max), tabulated for interpolation."""
    # choose z_max so the omitted tail mass is negligible relative to the
    # jump rate: exponential cut for r > 0, power cut for r = 0
    z_max = 60.0 / r if r > 0 else 1e12
    z = np.exp(np.linspace(math.log(eps_cut), math.log(z_max), 6000))
    tail = np.exp(-r * z) / np.sqrt(math.pi * z)
    u = tail / tail[0]  # decreasing from 1 to ~0
    return u[::-1], z[::-1]


def truncated_levy_trace_oracle(r: float, t_trace: float, eps_cut: float,
                                rng: RngStreamSpec, n_paths: int
                                ) -> TraceSampleSet:
    """Independent oracle for the trace law via direct subordination.

    The vertical clock subordinator is approximated by a compound Poisson
    process of its jumps above eps_cut plus the deterministic mean of the
    small jumps; a Gaussian of variance 2*clock gives the trace value.
    """
    if eps_cut <= 0 or eps_cut > 0.1:
        raise ValueError("eps_cut must be in (0, 0.1]")
    meas = analytic.LevyMeasure("PiPhi", r)
    rate = float(meas.tail(eps_cut))
    small_mean, _ = integrate.quad(lambda z: z * meas.density(z), 0.0, eps_cut,
                                   epsabs=1e-12, limit=200)
    u_tab, z_tab = _tail_inverse_table(r, eps_cut)
    gen = derive_stream(rng)
    h = np.full(n_paths, t_trace * small_mean)
    counts = gen.poisson(rate * t_trace, size=n_paths)
    # draw all jumps in chunks to bound memory
    idx = np.repeat(np.arange(n_paths), counts)
    total = idx.size
    for lo in range(0, total, 5_000_000):
        hi = min(lo + 5_000_000, total)
        us = gen.random(hi - lo)
        zs = np.interp(us, u_tab, z_tab)
        np.add.at(h, idx[lo:hi], zs)
    values = gen.standard_normal(n_paths) * np.sqrt(2.0 * h)
    return TraceSampleSet(which="oracle", t=t_trace, values=values)


def clock_mean_check(r: float, t_trace: float, eps_cut: float,
                     rng: RngStreamSpec, n_paths: int = 50_000):
    """Compare the truncated clock's empirical mean with the numerical
    derivative -d/dlam e^{-t phi(lam)} at 0+ (finite clock mean for r > 0)."""
    meas = analytic.LevyMeasure("PiPhi", r)
    rate = float(meas.tail(eps_cut))
    small_mean, _ = integrate.quad(lambda z: z * meas.density(z), 0.0, eps_cut,
                                   epsabs=1e-12, limit=200)
    u_tab, z_tab = _tail_inverse_table(r, eps_cut)
    gen = derive_stream(rng)
    counts = gen.poisson(rate * t_trace, size=n_paths)
    idx = np.repeat(np.arange(n_paths), counts)
    h = np.full(n_paths, t_trace * small_mean)
    zs = np.interp(gen.random(idx.size), u_tab, z_tab)
    np.add.at(h, idx, zs)
    lam = 1e-7
    target = -math.expm1(-t_trace * analytic.phi(lam, r)) / lam
    mean = float(h.mean())
    se = float(h.std(ddof=1) / math.sqrt(n_paths))
    return mean, se, target
