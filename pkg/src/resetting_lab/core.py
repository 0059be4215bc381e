"""Shared domain types: model parameters, path containers, RNG streams.

Every stochastic routine in the package receives an :class:`RngStreamSpec`
and derives its randomness from it, so that any simulation called twice
with the same parameters and stream produces byte-identical output.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

#: Absolute spatial tolerance for "the path is at the boundary".
TOL_X = 1e-12


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of a run.

    r        resetting rate (1/time, >= 0)
    x0       start position (>= 0 for half-line processes)
    x_r      resetting point (0 for all half-line runs)
    horizon  total simulated time T (> 0)
    dt       time step (> 0, < horizon)
    """

    r: float
    x0: float = 0.0
    x_r: float = 0.0
    horizon: float = 1.0
    dt: float = 1e-3


def validate_params(p: ModelParams, half_line: bool = True) -> list[str]:
    """Return a message for every violated invariant (empty list = ok)."""
    errors = []
    if p.r < 0:
        errors.append("r must be >= 0")
    if p.dt <= 0:
        errors.append("dt must be > 0")
    if p.horizon <= 0:
        errors.append("horizon must be > 0")
    if p.dt > 0 and p.horizon > 0 and p.dt >= p.horizon:
        errors.append("dt must be < horizon")
    if half_line:
        if p.x0 < 0:
            errors.append("x0 must be >= 0 for half-line processes")
        if p.x_r != 0:
            errors.append("x_r must be 0 for half-line processes")
    return errors


def require_valid(p: ModelParams, half_line: bool = True) -> None:
    errors = validate_params(p, half_line=half_line)
    if errors:
        raise ValueError("invalid ModelParams: " + "; ".join(errors))


# ---------------------------------------------------------------------------
# RNG streams


@dataclass(frozen=True)
class RngStreamSpec:
    """Identifies one reproducible random stream.

    Distinct ``stream_index`` values (one per Monte Carlo path) give
    statistically independent sequences; equal specs give byte-identical
    sequences on every run and platform.
    """

    master_seed: int
    stream_index: int = 0


def derive_stream(spec: RngStreamSpec) -> np.random.Generator:
    """Counter-based generator for the given stream (O(1) jump-ahead)."""
    bg = np.random.Philox(key=spec.master_seed & ((1 << 64) - 1))
    if spec.stream_index:
        bg = bg.jumped(spec.stream_index)
    return np.random.Generator(bg)


_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def kernel_seeds(spec: RngStreamSpec, n_paths: int) -> np.ndarray:
    """Per-path uint64 seeds for the compiled kernels.

    Seeds are a splitmix64 hash of (master_seed, stream_index + i); the
    compiled kernels run their own counter-based stream off each seed, so
    path i is reproducible independently of scheduling or batch size.
    """
    idx = np.arange(spec.stream_index, spec.stream_index + n_paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(spec.master_seed & ((1 << 64) - 1)) + _GOLD * (idx + np.uint64(1))
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
        # avoid the (astronomically unlikely) all-zero state
        z = z | np.uint64(1)
    return z


def num_threads() -> int:
    """Worker cap from RESETTING_LAB_THREADS (default: all available)."""
    env = os.environ.get("RESETTING_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# path containers


@dataclass
class EventLog:
    """Reset and boundary-jump events of one trajectory."""

    reset_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    pre_reset_positions: np.ndarray = field(default_factory=lambda: np.empty(0))
    boundary_jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    boundary_jump_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))

    def validate(self) -> list[str]:
        errors = []
        if len(self.reset_times) != len(self.pre_reset_positions):
            errors.append("reset_times and pre_reset_positions differ in length")
        if len(self.reset_times) > 1 and not np.all(np.diff(self.reset_times) > 0):
            errors.append("reset_times must be strictly increasing")
        if np.any(self.pre_reset_positions < 0):
            errors.append("pre_reset_positions must be >= 0")
        if np.any(self.boundary_jump_sizes <= 0):
            errors.append("boundary jump sizes must be > 0")
        return errors

    def to_json(self) -> str:
        return json.dumps(
            {
                "reset_times": list(map(float, self.reset_times)),
                "pre_reset_positions": list(map(float, self.pre_reset_positions)),
                "boundary_jumps": [
                    [float(t), float(s)]
                    for t, s in zip(self.boundary_jump_times, self.boundary_jump_sizes)
                ],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "EventLog":
        d = json.loads(text)
        jumps = np.asarray(d.get("boundary_jumps", []), dtype=float).reshape(-1, 2)
        return cls(
            reset_times=np.asarray(d.get("reset_times", []), dtype=float),
            pre_reset_positions=np.asarray(d.get("pre_reset_positions", []), dtype=float),
            boundary_jump_times=jumps[:, 0],
            boundary_jump_sizes=jumps[:, 1],
        )


@dataclass
class SamplePath:
    """Discretized trajectory on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    events: EventLog = field(default_factory=EventLog)

    def validate(self, horizon: float | None = None, half_line: bool = True) -> list[str]:
        errors = []
        if self.times[0] != 0.0:
            errors.append("times must start at 0")
        if not np.all(np.diff(self.times) > 0):
            errors.append("times must be strictly increasing")
        if len(self.values) != len(self.times):
            errors.append("values and times differ in length")
        if horizon is not None and self.times[-1] > horizon + 1e-9:
            errors.append("last time exceeds horizon")
        if half_line and np.any(self.values < -TOL_X):
            errors.append("half-line path has negative values")
        errors.extend(self.events.validate())
        return errors

    def write_csv(self, path: str, local_time: np.ndarray | None = None) -> None:
        if local_time is None:
            header, cols = "t,x", (self.times, self.values)
        else:
            header, cols = "t,x,gamma", (self.times, self.values, local_time)
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="")


@dataclass
class AugmentedPath:
    """Trajectory plus local time and per-step Skorokhod pushes."""

    path: SamplePath
    local_time: np.ndarray
    regulator_increments: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.path.times

    @property
    def values(self) -> np.ndarray:
        return self.path.values

    def validate(self, horizon: float | None = None) -> list[str]:
        errors = self.path.validate(horizon=horizon)
        if self.local_time[0] != 0.0:
            errors.append("local_time must start at 0")
        if np.any(np.diff(self.local_time) < 0):
            errors.append("local_time must be nondecreasing")
        if np.any(self.regulator_increments < 0):
            errors.append("regulator increments must be >= 0")
        return errors

    def write_csv(self, path: str) -> None:
        self.path.write_csv(path, local_time=self.local_time)
