"""Statistical verification: empirical transforms, goodness-of-fit tests and
the two-point duality test."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import special, stats as sps

from .core import ModelParams, RngStreamSpec, derive_stream


@dataclass
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.size < 1:
            raise ValueError("need at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n(self) -> int:
        return self.samples.size


@dataclass
class VerificationReport:
    name: str
    statistic: float
    target: float
    tolerance: float
    passed: bool
    n: int
    seed: int
    detail: dict = dc_field(default_factory=dict)

    def to_json(self) -> str:
        d = dict(name=self.name, statistic=float(self.statistic),
                 target=float(self.target), tolerance=float(self.tolerance),
                 passed=bool(self.passed), n=int(self.n), seed=int(self.seed))
        if self.detail:
            d["detail"] = {k: (float(v) if isinstance(v, (int, float)) else v)
                           for k, v in self.detail.items()}
        return json.dumps(d)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: statistic={self.statistic:.6g} "
                f"target={self.target:.6g} tol={self.tolerance:.3g} (n={self.n})")


def _as_samples(emp) -> np.ndarray:
    if isinstance(emp, EmpiricalDistribution):
        return emp.samples
    return np.asarray(emp, dtype=float)


def ks_critical_value(n: int, alpha: float) -> float:
    """Asymptotic two-sided Kolmogorov-Smirnov critical value."""
    return special.kolmogi(alpha) / math.sqrt(n)


def ks_test(emp, cdf, alpha: float = 0.01, name: str = "ks",
            seed: int = 0) -> VerificationReport:
    """One-sample KS test of the samples against a target cdf."""
    x = np.sort(_as_samples(emp))
    n = x.size
    if n < 100:
        raise ValueError("need n >= 100 for the asymptotic KS test")
    c = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, n + 1) / n
    d = float(max(np.max(grid - c), np.max(c - (grid - 1.0 / n))))
    crit = ks_critical_value(n, alpha)
    return VerificationReport(name=name, statistic=d, target=0.0,
                              tolerance=crit, passed=d <= crit, n=n, seed=seed)


def two_sample_ks_test(emp_a, emp_b, alpha: float = 0.01, name: str = "ks2",
                       seed: int = 0) -> VerificationReport:
    a, b = _as_samples(emp_a), _as_samples(emp_b)
    res = sps.ks_2samp(a, b, method="asymp")
    passed = res.pvalue > alpha
    return VerificationReport(name=name, statistic=float(res.statistic),
                              target=0.0, tolerance=float("nan"),
                              passed=bool(passed), n=a.size, seed=seed,
                              detail={"pvalue": float(res.pvalue),
                                      "alpha": alpha})


def empirical_laplace(emp, lam: float):
    """(mean, standard error) of e^{-lam * sample}."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    x = _as_samples(emp)
    vals = np.exp(-lam * x)
    se = float(np.std(vals, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(vals)), se


def empirical_char(emp, xi: float):
    """(complex mean, standard error) of e^{i xi * sample}."""
    x = _as_samples(emp)
    vals = np.exp(1j * xi * x)
    mean = complex(np.mean(vals))
    if x.size > 1:
        se = math.sqrt((np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1))
                       / x.size)
    else:
        se = 0.0
    return mean, float(se)


def transform_check(emp, lam: float, target: float, name: str,
                    seed: int = 0, kind: str = "laplace",
                    n_sigma: float = 3.0) -> VerificationReport:
    """Mean-of-transform check with an n_sigma standard-error tolerance."""
    if kind == "laplace":
        mean, se = empirical_laplace(emp, lam)
    elif kind == "char":
        cmean, se = empirical_char(emp, lam)
        mean = cmean.real
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    tol = max(n_sigma * se, 1e-12)
    return VerificationReport(name=name, statistic=mean, target=target,
                              tolerance=tol, passed=abs(mean - target) <= tol,
                              n=_as_samples(emp).size, seed=seed,
                              detail={"se": se})


# ---------------------------------------------------------------------------
# duality two-point test


def _hist2d(a, b, edges):
    h, _, _ = np.histogram2d(a, b, bins=[edges, edges])
    return h


def _tv(h1, h2):
    p1 = h1 / h1.sum()
    p2 = h2 / h2.sum()
    return 0.5 * float(np.abs(p1 - p2).sum())


def duality_two_point_test(p: ModelParams, rng: RngStreamSpec, t: float,
                           n_paths: int = 1_000_000, n_cells: int = 20,
                           x_max: float = 4.0, n_boot: int = 200,
                           negative_control: bool = False
                           ) -> VerificationReport:
    """Two-point test of the reversal duality at equilibrium.

    The joint law of (start, position at t) for the reversed process should
    equal the transposed joint law for the forward resetting process when
    both start from the stationary law.  The total-variation distance
    between the two 2D histograms is compared to a resampling-calibrated
    null threshold (its 99th percentile).  With negative_control=True the
    forward histogram is compared to its own transpose instead, which must
    exceed the threshold (the process is not reversible).
    """
    # local imports avoid a module cycle
    from .reversal import xtilde_terminal_samples
    from .simulate import ProcessKind, terminal_samples

    if not (0.0 < t):
        raise ValueError("t must be > 0")
    sr = math.sqrt(p.r)
    pp = ModelParams(r=p.r, x0=0.0, horizon=t, dt=p.dt)

    gen = derive_stream(RngStreamSpec(rng.master_seed, rng.stream_index + 7))
    starts_f = gen.exponential(1.0 / sr, size=n_paths)
    starts_b = gen.exponential(1.0 / sr, size=n_paths)

    xf, _ = terminal_samples(ProcessKind("ReflectedResetting"), pp, rng,
                             n_paths, x0s=starts_f)
    if negative_control:
        starts_b, xb = starts_f, xf
    else:
        xb, _ = xtilde_terminal_samples(
            pp, RngStreamSpec(rng.master_seed, rng.stream_index + n_paths + 13),
            n_paths, x0s=starts_b)

    # coarsen until expected cell occupancy is adequate
    cells = n_cells
    while True:
        edges = np.linspace(0.0, x_max, cells + 1)
        edges = np.concatenate([edges, [np.inf]])  # overflow cell keeps mass
        h_fwd = _hist2d(starts_f, xf, edges)
        h_bwd = _hist2d(starts_b, xb, edges)
        if cells <= 4 or min(h_fwd.mean(), h_bwd.mean()) >= 5:
            break
        cells //= 2
    tv = _tv(h_bwd, h_fwd.T)

    # null calibration: TV between two same-size multinomial draws from the
    # pooled cell distribution
    pooled = (h_fwd + h_bwd.T).ravel()
    pooled = pooled / pooled.sum()
    boot_gen = derive_stream(RngStreamSpec(rng.master_seed,
                                           rng.stream_index + 31))
    tvs = np.empty(n_boot)
    for i in range(n_boot):
        a = boot_gen.multinomial(n_paths, pooled).astype(float)
        b = boot_gen.multinomial(n_paths, pooled).astype(float)
        tvs[i] = 0.5 * np.abs(a / n_paths - b / n_paths).sum()
    threshold = float(np.quantile(tvs, 0.99))

    name = "duality_two_point" + ("_negative_control" if negative_control else "")
    passed = (tv > threshold) if negative_control else (tv <= threshold)
    return VerificationReport(name=name, statistic=tv, target=0.0,
                              tolerance=threshold, passed=passed, n=n_paths,
                              seed=rng.master_seed,
                              detail={"cells": int(h_fwd.shape[0])})
