"""Compiled Monte Carlo kernels.

All kernels run one independent counter-based RNG stream per path (seeded
from `core.kernel_seeds`) and are embarrassingly parallel over paths.

The reflection step is exact: each step samples the Gaussian endpoint and
then the bridge minimum, so the joint law of (position, local time at 0)
at step boundaries has no discretization bias at any step size.  Resets and
stopping levels are handled by splitting steps at the exact event times.
Local time is the Skorokhod regulator: the cumulative push keeping the
path nonnegative.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLD = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.1102230246251565e-16  # 2^-53
_TINY = 5.551115123125783e-17   # 2^-54, keeps uniforms strictly positive


@njit(inline="always")
def _next_u64(state):
    state = state + _GOLD
    z = state
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    z = z ^ (z >> U64(31))
    return state, z


@njit(inline="always")
def _uniform(state):
    state, z = _next_u64(state)
    return state, (z >> U64(11)) * _INV53 + _TINY


@njit(inline="always")
def _normal_pair(state):
    state, u1 = _uniform(state)
    state, u2 = _uniform(state)
    rad = math.sqrt(-2.0 * math.log(u1))
    ang = 2.0 * math.pi * u2
    return state, rad * math.cos(ang), rad * math.sin(ang)


@njit(inline="always")
def _step(state, sp, have, x, gamma, drift, h):
    """One exact reflected step of length h from x >= 0.

    Returns (state, sp, have, x, gamma, touched) where touched flags boundary
    contact during the step.  `sp`/`have` carry the spare Box-Muller normal.
    """
    if have:
        n = sp
        have = False
    else:
        state, n, sp = _normal_pair(state)
        have = True
    b = drift * h + math.sqrt(2.0 * h) * n
    e = x + b
    # bridge dips below 0 with probability exp(-x*e/h); skip when negligible
    if e > 0.0 and x * e > 40.0 * h:
        return state, sp, have, e, gamma, False
    state, u = _uniform(state)
    m = 0.5 * (b - math.sqrt(b * b - 4.0 * h * math.log(u)))
    if x + m <= 0.0:
        inc = -(x + m)
        gamma += inc
        x = e + inc
        if x < 0.0:
            x = 0.0
        return state, sp, have, x, gamma, True
    return state, sp, have, e, gamma, False


@njit(parallel=True, cache=True)
def terminal_ensemble(seeds, x0s, drift, r_reset, T, dt, out_x, out_gamma):
    """Terminal (position, local time) of a reflected path with drift and
    Poissonian resets to 0 at rate r_reset."""
    n = seeds.shape[0]
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = x0s[i]
        gamma = 0.0
        t = 0.0
        if r_reset > 0.0:
            state, u = _uniform(state)
            next_reset = -math.log(u) / r_reset
        else:
            next_reset = 1e300
        while t < T:
            h = dt
            is_reset = False
            if t + h >= next_reset:
                h = next_reset - t
                is_reset = True
            if t + h >= T and (not is_reset or next_reset >= T):
                h = T - t
                is_reset = False
            if h > 0.0:
                state, sp, have, x, gamma, _ = _step(
                    state, sp, have, x, gamma, drift, h)
            t += h
            if is_reset:
                x = 0.0
                state, u = _uniform(state)
                next_reset = t - math.log(u) / r_reset
        out_x[i] = x
        out_gamma[i] = gamma


@njit(parallel=True, cache=True)
def reset_stats_ensemble(seeds, r_reset, T, dt, pre, gaps, lts, counts):
    """Per-reset statistics of the reflected resetting process started at 0:
    pre-reset position, inter-reset time gap and inter-reset local time."""
    n = seeds.shape[0]
    max_ev = pre.shape[1]
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = 0.0
        gamma = 0.0
        t = 0.0
        last_t = 0.0
        last_g = 0.0
        cnt = 0
        state, u = _uniform(state)
        next_reset = -math.log(u) / r_reset
        while t < T and cnt < max_ev:
            h = dt
            is_reset = False
            if t + h >= next_reset:
                h = next_reset - t
                is_reset = True
            if t + h >= T and (not is_reset or next_reset >= T):
                h = T - t
                is_reset = False
            if h > 0.0:
                state, sp, have, x, gamma, _ = _step(
                    state, sp, have, x, gamma, 0.0, h)
            t += h
            if is_reset:
                pre[i, cnt] = x
                gaps[i, cnt] = t - last_t
                lts[i, cnt] = gamma - last_g
                cnt += 1
                last_t = t
                last_g = gamma
                x = 0.0
                state, u = _uniform(state)
                next_reset = t - math.log(u) / r_reset
        counts[i] = cnt


@njit(parallel=True, cache=True)
def gamma_crossing_ensemble(seeds, levels, x0, drift, r_reset, dt, t_cap,
                            adapt_coef, out_t, censored):
    """First time the regulator local time exceeds a per-path level.

    The crossing step is located exactly; the time inside it is reported at
    the step midpoint.  adapt_coef > 0 enables long steps h = adapt_coef*x^2
    away from the boundary (the step law stays exact at any h)."""
    n = seeds.shape[0]
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = x0
        gamma = 0.0
        t = 0.0
        level = levels[i]
        if level <= 0.0:
            out_t[i] = 0.0
            censored[i] = False
            continue
        if r_reset > 0.0:
            state, u = _uniform(state)
            next_reset = -math.log(u) / r_reset
        else:
            next_reset = 1e300
        done = False
        while t < t_cap:
            h = dt
            if adapt_coef > 0.0:
                ha = adapt_coef * x * x
                if ha > h:
                    h = ha
            is_reset = False
            if t + h >= next_reset:
                h = next_reset - t
                is_reset = True
            if h > 0.0:
                state, sp, have, x, gamma, _ = _step(
                    state, sp, have, x, gamma, drift, h)
            if gamma >= level:
                out_t[i] = t + 0.5 * h
                censored[i] = False
                done = True
                break
            t += h
            if is_reset:
                x = 0.0
                state, u = _uniform(state)
                next_reset = t - math.log(u) / r_reset
        if not done:
            out_t[i] = t_cap
            censored[i] = True


@njit(parallel=True, cache=True)
def hitting_time_ensemble(seeds, x0, drift, dt, t_cap, out_t, hit):
    """First boundary contact time of a reflected path started at x0 > 0.

    Contact is detected exactly via the bridge minimum; the reported time is
    the midpoint of the detecting step."""
    n = seeds.shape[0]
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = x0
        gamma = 0.0
        t = 0.0
        found = False
        while t < t_cap:
            h = dt
            state, sp, have, x, gamma, touched = _step(
                state, sp, have, x, gamma, drift, h)
            if touched:
                out_t[i] = t + 0.5 * h
                hit[i] = True
                found = True
                break
            t += h
        if not found:
            out_t[i] = t_cap
            hit[i] = False


@njit(inline="always")
def _remaining_lifetime(state, sr, v):
    """Overshoot past level v of a drift-1 subordinator with compound-Poisson
    jumps of rate sr and Exp(sr) sizes (alternating-renewal walk on the value
    axis)."""
    if sr <= 0.0:
        return state, 0.0
    acc = 0.0
    while True:
        state, u = _uniform(state)
        stretch = -math.log(u) / sr
        if acc + stretch > v:
            return state, 0.0
        acc += stretch
        state, u = _uniform(state)
        gap = -math.log(u) / sr
        if acc + gap > v:
            return state, acc + gap - v
        acc += gap


@njit(parallel=True, cache=True)
def xtilde_terminal_ensemble(seeds, x0s, r, T, dt, out_x, out_gamma):
    """Terminal value of the reversed process: drifted reflected path plus
    the subordinator overshoot at the accumulated local time."""
    n = seeds.shape[0]
    sr = math.sqrt(r)
    drift = -2.0 * sr
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = x0s[i]
        gamma = 0.0
        t = 0.0
        while t < T:
            h = dt
            if t + h > T:
                h = T - t
            state, sp, have, x, gamma, _ = _step(
                state, sp, have, x, gamma, drift, h)
            t += h
        state, rem = _remaining_lifetime(state, sr, gamma)
        out_x[i] = x + rem
        out_gamma[i] = gamma


@njit(parallel=True, cache=True)
def xtilde_event_stats(seeds, r, T, dt, jump_sizes, holdings, jump_counts,
                       hold_counts):
    """Boundary-jump sizes and zero-holding local times of the reversed
    process, collected over one horizon per path.

    The subordinator's value axis alternates Exp(sqrt(r)) drift stretches
    (path glued to 0) and Exp(sqrt(r)) gaps (boundary jumps); events are
    recorded as the continuous local time of the drifted path crosses them."""
    n = seeds.shape[0]
    max_ev = jump_sizes.shape[1]
    sr = math.sqrt(r)
    drift = -2.0 * sr
    for i in prange(n):
        state = seeds[i]
        sp = 0.0
        have = False
        x = 0.0
        gamma = 0.0
        t = 0.0
        state, u = _uniform(state)
        stretch = -math.log(u) / sr
        boundary = stretch  # value-axis end of the current phase
        in_gap = False
        cur_len = stretch
        n_j = 0
        n_h = 0
        while t < T and n_j < max_ev and n_h < max_ev:
            h = dt
            if t + h > T:
                h = T - t
            state, sp, have, x, gamma, _ = _step(
                state, sp, have, x, gamma, drift, h)
            t += h
            while gamma >= boundary:
                if in_gap:
                    state, u = _uniform(state)
                    cur_len = -math.log(u) / sr
                    in_gap = False
                else:
                    holdings[i, n_h] = cur_len
                    n_h += 1
                    state, u = _uniform(state)
                    cur_len = -math.log(u) / sr
                    jump_sizes[i, n_j] = cur_len
                    n_j += 1
                    in_gap = True
                boundary += cur_len
                if n_j >= max_ev or n_h >= max_ev:
                    break
        jump_counts[i] = n_j
        hold_counts[i] = n_h
