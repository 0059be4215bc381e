"""Simulation and numerical verification of reflected Brownian motion with
Poissonian resetting, its time-reversed process with non-local boundary
behavior, their local times, and the boundary trace processes."""

from .core import (AugmentedPath, EventLog, ModelParams, RngStreamSpec,
                   SamplePath, TOL_X, derive_stream, kernel_seeds,
                   validate_params)
from .simulate import ProcessKind, simulate

__version__ = "0.1.0"

__all__ = [
    "AugmentedPath", "EventLog", "ModelParams", "ProcessKind",
    "RngStreamSpec", "SamplePath", "TOL_X", "derive_stream", "kernel_seeds",
    "simulate", "validate_params", "__version__",
]
