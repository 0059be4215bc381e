"""Path simulation for free/reflected Brownian motion, the resetting
processes, and the drifted reflected motion.

Two engines share one stepping rule (exact Gaussian endpoint + exact bridge
minimum, so reflection and local time carry no discretization bias):

* :func:`simulate` builds one full trajectory with event log — inspection,
  CLI output, small tests;
* the ``*_samples`` / ``*_ensemble`` helpers call the compiled kernels in
  :mod:`._kernels` for large Monte Carlo ensembles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import _kernels
from .core import (AugmentedPath, EventLog, ModelParams, RngStreamSpec,
                   SamplePath, TOL_X, derive_stream, kernel_seeds,
                   num_threads, require_valid)

#: Multiplier taking the (1/2 eps) occupation estimate to the regulator
#: normalization (the one whose inverse has Laplace exponent lam/sqrt(lam+r)).
OCCUPATION_CALIBRATION = 2.0

_TAGS = ("FreeBM", "ReflectedBM", "FreeResetting", "ReflectedResetting",
         "DriftedReflected")


@dataclass(frozen=True)
class ProcessKind:
    tag: str

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown process kind {self.tag!r}")

    @property
    def reflected(self) -> bool:
        return self.tag in ("ReflectedBM", "ReflectedResetting",
                            "DriftedReflected")

    @property
    def resetting(self) -> bool:
        return self.tag in ("FreeResetting", "ReflectedResetting")

    def drift(self, r: float) -> float:
        return -2.0 * math.sqrt(r) if self.tag == "DriftedReflected" else 0.0


def _configure_threads() -> None:
    try:
        numba.set_num_threads(min(num_threads(), numba.config.NUMBA_NUM_THREADS))
    except ValueError:
        pass


def _bridge_min(rng: np.random.Generator, b: float, h: float) -> float:
    """Minimum (relative to the start point) of a variance-2 Brownian step of
    length h conditioned on increment b."""
    u = rng.random()
    if u <= 0.0:
        u = np.finfo(float).tiny
    return 0.5 * (b - math.sqrt(b * b - 4.0 * h * math.log(u)))


def simulate(kind: ProcessKind, p: ModelParams, rng: RngStreamSpec) -> AugmentedPath:
    """One trajectory on the uniform dt grid with reset times inserted exactly.

    At a reset time the pre-reset position is logged and the post-reset value
    0 is stored at that grid point.
    """
    require_valid(p, half_line=kind.reflected)
    gen = derive_stream(rng)
    drift = kind.drift(p.r)
    rate = p.r if kind.resetting else 0.0

    times = [0.0]
    values = [p.x0]
    pushes = [0.0]
    reset_times = []
    pre_reset = []

    x = p.x0
    t = 0.0
    next_reset = math.inf
    if rate > 0.0:
        next_reset = gen.exponential(1.0 / rate)
    while t < p.horizon:
        h = p.dt
        is_reset = False
        if t + h >= next_reset:
            h = next_reset - t
            is_reset = True
        if t + h >= p.horizon and (not is_reset or next_reset >= p.horizon):
            h = p.horizon - t
            is_reset = False
        push = 0.0
        if h > 0.0:
            b = drift * h + math.sqrt(2.0 * h) * gen.standard_normal()
            e = x + b
            if not kind.reflected:
                x = e
            elif e > 0.0 and x * e > 40.0 * h:
                x = e
            else:
                m = _bridge_min(gen, b, h)
                if x + m <= 0.0:
                    push = -(x + m)
                    x = max(e + push, 0.0)
                else:
                    x = e
        t += h
        if is_reset:
            reset_times.append(t)
            pre_reset.append(x)
            x = 0.0
            next_reset = t + gen.exponential(1.0 / rate)
        times.append(t)
        values.append(x)
        pushes.append(push)

    pushes = np.asarray(pushes)
    events = EventLog(reset_times=np.asarray(reset_times),
                      pre_reset_positions=np.asarray(pre_reset))
    path = SamplePath(times=np.asarray(times), values=np.asarray(values),
                      events=events)
    return AugmentedPath(path=path, local_time=np.cumsum(pushes),
                         regulator_increments=pushes)


def local_time_occupation(path: AugmentedPath, eps: float,
                          calibrated: bool = True) -> np.ndarray:
    """Occupation-time local-time estimate (1/2 eps) * time spent in [0, eps)
    per grid time, optionally rescaled to the regulator normalization."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    dt_steps = np.diff(path.times)
    below = (path.values[:-1] < eps).astype(float)
    est = np.concatenate([[0.0], np.cumsum(below * dt_steps)]) / (2.0 * eps)
    return OCCUPATION_CALIBRATION * est if calibrated else est


def first_hitting_time(path: AugmentedPath | SamplePath) -> float | None:
    """First grid/event time at which the path is at the boundary."""
    values = path.values
    idx = np.nonzero(values <= TOL_X)[0]
    if idx.size == 0:
        return None
    return float(path.times[idx[0]])


# ---------------------------------------------------------------------------
# ensemble samplers (compiled kernels)


def terminal_samples(kind: ProcessKind, p: ModelParams, rng: RngStreamSpec,
                     n_paths: int, x0s: np.ndarray | None = None):
    """Terminal (position, local time) over n_paths independent paths.

    x0s overrides p.x0 per path (e.g. stationary starts).  Free kinds are not
    supported here; use :func:`simulate` for those.
    """
    if not kind.reflected:
        raise ValueError("terminal_samples supports reflected kinds only")
    require_valid(p)
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    if x0s is None:
        x0s = np.full(n_paths, p.x0)
    x0s = np.ascontiguousarray(x0s, dtype=float)
    out_x = np.empty(n_paths)
    out_g = np.empty(n_paths)
    rate = p.r if kind.resetting else 0.0
    _kernels.terminal_ensemble(seeds, x0s, kind.drift(p.r), rate, p.horizon,
                               p.dt, out_x, out_g)
    return out_x, out_g


def inverse_local_time_samples(kind: ProcessKind, p: ModelParams,
                               rng: RngStreamSpec, x: float, n_paths: int,
                               t_cap: float | None = None,
                               adapt_coef: float = 0.0):
    """First times the local time at 0 exceeds level x, one per path.

    Returns (times of non-censored paths, number censored).  Paths whose
    local time never reaches x within t_cap (default: a multiple of the mean
    crossing time, grown 4x once) are excluded and counted.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if not kind.reflected:
        raise ValueError("local time requires a reflected kind")
    require_valid(p)
    rate = p.r if kind.resetting else 0.0
    if t_cap is None:
        # mean crossing time is x/sqrt(r) with resetting, x^2-scale without
        base = 50.0 * max(x, 1.0) / math.sqrt(rate) if rate > 0 else \
            5e3 * max(x, 1.0) ** 2
        t_cap = 4.0 * base
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    levels = np.full(n_paths, float(x))
    out_t = np.empty(n_paths)
    censored = np.empty(n_paths, dtype=np.bool_)
    _kernels.gamma_crossing_ensemble(seeds, levels, p.x0, kind.drift(p.r),
                                     rate, p.dt, t_cap, adapt_coef, out_t,
                                     censored)
    return out_t[~censored], int(censored.sum())


def local_time_crossing_samples(levels: np.ndarray, p: ModelParams,
                                rng: RngStreamSpec, drift: float,
                                rate: float, t_cap: float,
                                adapt_coef: float = 0.0):
    """Lower-level variant with per-path levels and explicit dynamics."""
    _configure_threads()
    seeds = kernel_seeds(rng, len(levels))
    levels = np.ascontiguousarray(levels, dtype=float)
    out_t = np.empty(len(levels))
    censored = np.empty(len(levels), dtype=np.bool_)
    _kernels.gamma_crossing_ensemble(seeds, levels, p.x0, drift, rate, p.dt,
                                     t_cap, adapt_coef, out_t, censored)
    return out_t, censored


def hitting_time_samples(p: ModelParams, rng: RngStreamSpec, n_paths: int,
                         drift: float | None = None,
                         t_cap: float | None = None):
    """First boundary-contact times of the drifted reflected motion from x0.

    Returns (times of paths that hit, number that never hit within t_cap).
    """
    require_valid(p)
    if drift is None:
        drift = -2.0 * math.sqrt(p.r)
    if t_cap is None:
        t_cap = p.horizon
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    out_t = np.empty(n_paths)
    hit = np.empty(n_paths, dtype=np.bool_)
    _kernels.hitting_time_ensemble(seeds, p.x0, drift, p.dt, t_cap, out_t, hit)
    return out_t[hit], int((~hit).sum())


def pre_reset_position_samples(p: ModelParams, rng: RngStreamSpec,
                               n_resets: int):
    """Pre-reset positions, inter-reset gaps and inter-reset local times of
    the reflected resetting process, pooled across paths.

    Returns a dict with keys 'positions', 'gaps', 'local_times' (each
    approximately n_resets long).
    """
    if p.r <= 0:
        raise ValueError("r must be > 0 to observe resets")
    require_valid(p)
    # record a fixed number of initial resets per path (a stopping rule in
    # the event index, so the pooled samples are unbiased) under a generous
    # time cap; a horizon cutoff would length-bias the recorded gaps
    max_ev = 32
    n_paths = max(4, int(math.ceil(n_resets / max_ev)))
    t_cap = max(p.horizon, (max_ev + 10.0 * math.sqrt(max_ev) + 20.0) / p.r)
    _configure_threads()
    seeds = kernel_seeds(rng, n_paths)
    pre = np.empty((n_paths, max_ev))
    gaps = np.empty((n_paths, max_ev))
    lts = np.empty((n_paths, max_ev))
    counts = np.empty(n_paths, dtype=np.int64)
    _kernels.reset_stats_ensemble(seeds, p.r, t_cap, p.dt, pre, gaps, lts,
                                  counts)
    mask = np.arange(max_ev)[None, :] < counts[:, None]
    return {
        "positions": pre[mask],
        "gaps": gaps[mask],
        "local_times": lts[mask],
        "counts": counts,
    }
