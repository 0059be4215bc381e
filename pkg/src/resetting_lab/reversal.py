"""Time-reversed process machinery.

The reversed process is built as X̃_t = B̃_t + R(γ̃_t): a Brownian motion
with drift -2 sqrt(r) reflected at 0, plus the remaining lifetime R of an
independent drift-1 subordinator with compound-Poisson jumps (rate sqrt(r),
Exp(sqrt(r)) sizes), evaluated at the accumulated boundary local time.
The composed local time L∘γ̃ is the boundary clock of X̃; its inverse has
the same Laplace exponent lam/sqrt(lam+r) as the plain reflected-resetting
local time clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, analytic
from .core import (AugmentedPath, EventLog, ModelParams, RngStreamSpec,
                   SamplePath, derive_stream, kernel_seeds, require_valid)
from .simulate import ProcessKind, _configure_threads, simulate
from .stats import VerificationReport, empirical_laplace


@dataclass
class SubordinatorPath:
    """Drift-plus-jumps increasing process on a finite operational horizon."""

    drift: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    horizon: float

    def __post_init__(self):
        self._cum = np.concatenate([[0.0], np.cumsum(self.jump_sizes)])

    def value(self, s: float) -> float:
        """H(s) = drift*s + sum of jumps up to and including s."""
        if s < 0 or s > self.horizon:
            raise ValueError("s outside covered operational range")
        k = np.searchsorted(self.jump_times, s, side="right")
        return self.drift * s + self._cum[k]

    @property
    def terminal_value(self) -> float:
        return self.value(self.horizon)

    def inverse(self, t: float) -> float:
        """Right-continuous inverse L(t) = inf{s : H(s) > t}."""
        if t < 0 or t > self.terminal_value:
            raise ValueError("t outside covered value range")
        # H(s-) at jump k is drift*T_k + cum[k]; H jumps to drift*T_k + cum[k+1]
        lo = self.drift * self.jump_times + self._cum[:-1]
        k = np.searchsorted(lo, t, side="right")
        # t lies below the k-th jump: invert the drift segment before it,
        # unless t falls inside the (k-1)-th jump's gap
        if k > 0:
            top = self.drift * self.jump_times[k - 1] + self._cum[k]
            if t < top:
                return float(self.jump_times[k - 1])
        # clamp: rounding may push the top drift segment past the horizon
        return min((t - self._cum[k]) / self.drift, self.horizon)

    def remaining_lifetime(self, t: float) -> float:
        """Overshoot H(L(t)) - t past level t (0 off jump gaps)."""
        s = self.inverse(t)
        k = np.searchsorted(self.jump_times, s, side="right")
        return self.drift * s + self._cum[k] - t


def sample_subordinator_psi(r: float, op_horizon: float,
                            rng: RngStreamSpec) -> SubordinatorPath:
    """Drift-1 subordinator with jump rate sqrt(r) and Exp(sqrt(r)) sizes."""
    if op_horizon <= 0:
        raise ValueError("op_horizon must be > 0")
    gen = derive_stream(rng)
    sr = math.sqrt(r)
    if sr == 0.0:
        return SubordinatorPath(1.0, np.empty(0), np.empty(0), op_horizon)
    times = []
    t = gen.exponential(1.0 / sr)
    while t <= op_horizon:
        times.append(t)
        t += gen.exponential(1.0 / sr)
    times = np.asarray(times)
    sizes = gen.exponential(1.0 / sr, size=len(times))
    return SubordinatorPath(1.0, times, sizes, op_horizon)


def inverse_subordinator(s: SubordinatorPath, t: float) -> float:
    return s.inverse(t)


def remaining_lifetime(s: SubordinatorPath, t: float) -> float:
    return s.remaining_lifetime(t)


@dataclass
class ReversedPath:
    """One reversed-process trajectory with its building blocks."""

    path: SamplePath
    gamma_tilde: np.ndarray
    subordinator: SubordinatorPath
    composed_local_time: np.ndarray
    underlying: AugmentedPath = field(repr=False, default=None)


def build_x_tilde(p: ModelParams, rng: RngStreamSpec) -> ReversedPath:
    """Compose the drifted reflected path with an independent subordinator.

    Boundary jumps are logged at the first grid/event time the local time
    enters a subordinator jump gap, with the gap width as the size.
    """
    require_valid(p)
    base = simulate(ProcessKind("DriftedReflected"), p, rng)
    gamma = base.local_time
    g_end = float(gamma[-1])
    # grow the operational horizon in blocks until it covers gamma(T)
    op_horizon = max(1.0, g_end)
    sub_rng = RngStreamSpec(rng.master_seed, rng.stream_index + 1)
    sub = sample_subordinator_psi(p.r, op_horizon, sub_rng)
    while sub.terminal_value < g_end:
        op_horizon *= 2.0
        sub = sample_subordinator_psi(p.r, op_horizon, sub_rng)

    values = np.empty_like(gamma)
    composed = np.empty_like(gamma)
    for i, g in enumerate(gamma):
        values[i] = base.values[i] + sub.remaining_lifetime(g)
        composed[i] = sub.inverse(g)

    # boundary jumps: gamma crossing the left edge of each jump gap
    jt, js = [], []
    lefts = sub.drift * sub.jump_times + sub._cum[:-1]
    for left, size in zip(lefts, sub.jump_sizes):
        i = np.searchsorted(gamma, left, side="right")
        if i >= len(gamma):
            break
        if gamma[i] > left:
            jt.append(base.times[i])
            js.append(size)
    events = EventLog(boundary_jump_times=np.asarray(jt),
                      boundary_jump_sizes=np.asarray(js))
    path = SamplePath(times=base.times, values=values, events=events)
    return ReversedPath(path=path, gamma_tilde=gamma, subordinator=sub,
                        composed_local_time=composed, underlying=base)


# ---------------------------------------------------------------------------
# ensemble samplers


def xtilde_terminal_samples(p: ModelParams, rng: RngStreamSpec, n_paths: int,
                            x0s: np.ndarray | None = None):
    """Terminal values of the reversed process over n_paths paths."""
    require_valid(p)
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    if x0s is None:
        x0s = np.full(n_paths, p.x0)
    x0s = np.ascontiguousarray(x0s, dtype=float)
    out_x = np.empty(n_paths)
    out_g = np.empty(n_paths)
    _kernels.xtilde_terminal_ensemble(seeds, x0s, p.r, p.horizon, p.dt,
                                      out_x, out_g)
    return out_x, out_g


def xtilde_event_samples(p: ModelParams, rng: RngStreamSpec, n_paths: int,
                         max_events: int = 32):
    """Pooled boundary-jump sizes and zero-holding local times of X̃.

    A fixed number of initial events is recorded per path (stopping in the
    event index keeps the pooled samples unbiased); the horizon acts only as
    a generous time cap.
    """
    if p.r <= 0:
        raise ValueError("r must be > 0 for boundary jumps")
    require_valid(p)
    # gamma accrues at rate ~2 sqrt(r) and one event cycle spans ~2/sqrt(r)
    # local-time units, so max_events cycles take ~max_events/r physical time
    t_cap = max(p.horizon, 6.0 * max_events / p.r)
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    jumps = np.empty((n_paths, max_events))
    holds = np.empty((n_paths, max_events))
    n_j = np.empty(n_paths, dtype=np.int64)
    n_h = np.empty(n_paths, dtype=np.int64)
    _kernels.xtilde_event_stats(seeds, p.r, t_cap, p.dt, jumps, holds,
                                n_j, n_h)
    cols = np.arange(max_events)[None, :]
    return {
        "jump_sizes": jumps[cols < n_j[:, None]],
        "holding_local_times": holds[cols < n_h[:, None]],
    }


def subordinator_level_values(r: float, level: float, rng: RngStreamSpec,
                              n: int) -> np.ndarray:
    """n independent draws of H(level): level + compound-Poisson jump sum."""
    gen = derive_stream(rng)
    sr = math.sqrt(r)
    if sr == 0.0:
        return np.full(n, level)
    counts = gen.poisson(sr * level, size=n)
    total = int(counts.sum())
    sizes = gen.exponential(1.0 / sr, size=total)
    out = np.add.reduceat(np.concatenate([[0.0], sizes]),
                          np.concatenate([[0], np.cumsum(counts)[:-1]]))
    out[counts == 0] = 0.0
    return level + out


# ---------------------------------------------------------------------------
# verification helpers


def x_tilde_marginal_check(p: ModelParams, rng: RngStreamSpec, f,
                           f_integral_stationary: float,
                           n_paths: int = 100_000) -> VerificationReport:
    """Start X̃ from the stationary law and compare E[f(X̃_T)] with the
    stationary integral of f."""
    starts = derive_stream(
        RngStreamSpec(rng.master_seed, rng.stream_index + n_paths)
    ).exponential(1.0 / math.sqrt(p.r), size=n_paths)
    xs, _ = xtilde_terminal_samples(p, rng, n_paths, x0s=starts)
    vals = f(xs)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n_paths))
    return VerificationReport(
        name="x_tilde_stationary_marginal",
        statistic=mean, target=f_integral_stationary,
        tolerance=3.0 * se, passed=abs(mean - f_integral_stationary) <= 3 * se,
        n=n_paths, seed=rng.master_seed)


def composed_local_time_inverse_samples(p: ModelParams, rng: RngStreamSpec,
                                        x: float, n_paths: int,
                                        t_cap: float | None = None):
    """First times the composed boundary clock of X̃ exceeds x.

    The crossing happens when γ̃ exceeds H(x), so per-path levels H(x) are
    presampled and the drifted path is run to the level crossing.
    Returns (times, n_censored).
    """
    require_valid(p)
    if x < 0:
        raise ValueError("x must be >= 0")
    level_rng = RngStreamSpec(rng.master_seed, rng.stream_index + n_paths)
    levels = subordinator_level_values(p.r, x, level_rng, n_paths)
    if t_cap is None:
        sr = math.sqrt(p.r)
        mean_level = x * (1.0 + sr * (1.0 / sr)) if sr > 0 else x
        t_cap = 200.0 * max(mean_level, 1.0) if p.r > 0 else \
            2e4 * max(x, 1.0) ** 2
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    out_t = np.empty(n_paths)
    censored = np.empty(n_paths, dtype=np.bool_)
    _kernels.gamma_crossing_ensemble(seeds, levels, p.x0,
                                     -2.0 * math.sqrt(p.r), 0.0, p.dt, t_cap,
                                     0.0, out_t, censored)
    return out_t[~censored], int(censored.sum())


def composed_local_time_law_check(p: ModelParams, rng: RngStreamSpec,
                                  x: float, lam: float,
                                  n_paths: int = 100_000) -> VerificationReport:
    """Laplace-transform check of the inverse composed clock against
    e^{-x lam/sqrt(lam+r)}."""
    times, n_cens = composed_local_time_inverse_samples(p, rng, x, n_paths)
    mean, se = empirical_laplace(times, lam)
    target = math.exp(-x * analytic.phi(lam, p.r)) if x > 0 else 1.0
    tol = max(3.0 * se, 1e-12)
    return VerificationReport(
        name=f"composed_clock_inverse_laplace(lam={lam})",
        statistic=mean, target=target, tolerance=tol,
        passed=abs(mean - target) <= tol, n=len(times),
        seed=rng.master_seed,
        detail={"censored": n_cens})
