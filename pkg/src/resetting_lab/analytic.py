"""Closed-form kernels, densities, Laplace exponents, Lévy measures and
resolvents for the resetting / reflected / drifted-reflected processes.

All Brownian motions here have generator d²/dx² (variance 2t), so the heat
kernel is g(t,z) = exp(-z²/4t)/sqrt(4 pi t).  Everything in this module is a
pure function of its arguments; the only numerics are adaptive quadratures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

_QUAD_ABS_TOL = 1e-10


def _quad(fn, a, b, points=None):
    val, _ = integrate.quad(fn, a, b, epsabs=_QUAD_ABS_TOL, epsrel=1e-10,
                            limit=200, points=points)
    return val


# ---------------------------------------------------------------------------
# kernels


def heat_kernel(t: float, z) -> float:
    """Transition density of variance-2t Brownian motion."""
    if t <= 0:
        raise ValueError("t must be > 0")
    z = np.asarray(z, dtype=float)
    out = np.exp(-(z * z) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return out if out.ndim else float(out)


def heat_kernel_laplace(lam: float, x: float) -> float:
    """Time-Laplace transform of the heat kernel: e^{-|x| sqrt(lam)}/(2 sqrt(lam))."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    return 0.5 * math.exp(-abs(x) * math.sqrt(lam)) / math.sqrt(lam)


def first_passage_laplace_kernel(lam: float, x: float) -> float:
    """Laplace transform of the level-|x| first-passage density: e^{-|x| sqrt(lam)}."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    return math.exp(-abs(x) * math.sqrt(lam))


def reflected_bm_density(t: float, x: float, y) -> float:
    """Method-of-images transition density of Brownian motion reflected at 0."""
    if t <= 0:
        raise ValueError("t must be > 0")
    if x < 0 or np.any(np.asarray(y) < 0):
        raise ValueError("x and y must be >= 0")
    return heat_kernel(t, np.asarray(y) + x) + heat_kernel(t, np.asarray(y) - x)


def resetting_density_free(t: float, x: float, x_r: float, y, r: float) -> float:
    """Density of free Brownian motion reset to x_r at rate r (renewal form)."""
    if t <= 0:
        raise ValueError("t must be > 0")
    y = np.asarray(y, dtype=float)
    surv = math.exp(-r * t) * heat_kernel(t, y - x)
    if r == 0:
        return surv
    if y.ndim:
        reset = np.array([
            _quad(lambda s: r * math.exp(-r * s) * heat_kernel(s, yi - x_r), 0.0, t)
            for yi in y
        ])
    else:
        reset = _quad(lambda s: r * math.exp(-r * s) * heat_kernel(s, float(y) - x_r), 0.0, t)
    out = surv + reset
    return out if np.ndim(out) else float(out)


def resetting_density_reflected(t: float, x: float, y, r: float) -> float:
    """Density of reflected Brownian motion reset to 0 at rate r."""
    if t <= 0:
        raise ValueError("t must be > 0")
    y = np.asarray(y, dtype=float)
    surv = math.exp(-r * t) * reflected_bm_density(t, x, y)
    if r == 0:
        return surv
    if y.ndim:
        reset = np.array([
            _quad(lambda s: 2.0 * r * math.exp(-r * s) * heat_kernel(s, yi), 0.0, t)
            for yi in y
        ])
    else:
        reset = _quad(lambda s: 2.0 * r * math.exp(-r * s) * heat_kernel(s, float(y)), 0.0, t)
    out = surv + reset
    return out if np.ndim(out) else float(out)


def stationary_density_halfline(y, r: float) -> float:
    """Stationary density sqrt(r) e^{-sqrt(r) y} of the reset-reflected process."""
    if r <= 0:
        raise ValueError("r must be > 0")
    sr = math.sqrt(r)
    out = sr * np.exp(-sr * np.asarray(y, dtype=float))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Laplace exponents


def phi(lam, r: float):
    """Laplace exponent lam/sqrt(lam+r) of the inverse boundary local time."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lam must be > 0")
    # r = 0 collapses to the stable exponent sqrt(lam) exactly
    out = np.sqrt(lam) if r == 0.0 else lam / np.sqrt(lam + r)
    return out if out.ndim else float(out)


def psi(lam, r: float):
    """Laplace exponent lam + sqrt(r) - r/(lam + sqrt(r)) (drift 1, compound Poisson)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lam must be > 0")
    sr = math.sqrt(r)
    out = lam + sr - r / (lam + sr)
    return out if out.ndim else float(out)


def psi_phi_identity_check(lam: float, r: float) -> float:
    """Residual of psi(sqrt(lam+r) - sqrt(r)) == phi(lam)."""
    shifted = math.sqrt(lam + r) - math.sqrt(r)
    return abs(psi(shifted, r) - phi(lam, r))


def inverse_local_time_marginal_laplace(lam: float, x: float, r: float) -> float:
    """Space-Laplace transform (phi(lam)/lam) e^{-x phi(lam)} of the inverse
    local time's first-passage density."""
    p = phi(lam, r)
    return (p / lam) * math.exp(-x * p)


@dataclass(frozen=True)
class LaplaceExponent:
    """One of the four Bernstein functions used throughout."""

    kind: str  # {"Phi", "Psi", "HalfStable", "DriftedBM"}
    r: float = 0.0

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise ValueError("lam must be > 0")
        if self.kind == "Phi":
            out = lam / np.sqrt(lam + self.r)
        elif self.kind == "Psi":
            sr = math.sqrt(self.r)
            out = lam + sr - self.r / (lam + sr)
        elif self.kind == "HalfStable":
            out = np.sqrt(lam)
        elif self.kind == "DriftedBM":
            out = np.sqrt(lam + self.r) - math.sqrt(self.r)
        else:
            raise ValueError(f"unknown exponent kind {self.kind!r}")
        return out if out.ndim else float(out)

    @property
    def drift(self) -> float:
        """lim phi(lam)/lam as lam -> infinity."""
        return 1.0 if self.kind == "Psi" else 0.0


# ---------------------------------------------------------------------------
# Lévy measures


@dataclass(frozen=True)
class LevyMeasure:
    """Jump measure on (0, infinity), exposed via density and tail."""

    kind: str  # {"PiPhi", "PiPsi"}
    r: float = 0.0

    def density(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("z must be > 0")
        if self.kind == "PiPsi":
            sr = math.sqrt(self.r)
            out = self.r * np.exp(-sr * z)
        elif self.kind == "PiPhi":
            out = np.exp(-self.r * z) * (2.0 * self.r * z + 1.0) / (
                2.0 * math.sqrt(math.pi) * z ** 1.5)
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        return out if out.ndim else float(out)

    def tail(self, z):
        """Mass of (z, infinity), in closed form."""
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("z must be > 0")
        if self.kind == "PiPsi":
            sr = math.sqrt(self.r)
            out = sr * np.exp(-sr * z)
        elif self.kind == "PiPhi":
            out = np.exp(-self.r * z) / np.sqrt(math.pi * z)
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        return out if out.ndim else float(out)

    @property
    def total_mass(self) -> float:
        if self.kind == "PiPsi":
            return math.sqrt(self.r)
        return math.inf


def levy_density(measure: LevyMeasure, z):
    return measure.density(z)


def levy_khintchine_check(exponent: LaplaceExponent, lam: float) -> float:
    """Residual of drift*lam + integral (1 - e^{-lam z}) Pi(dz) == exponent(lam)."""
    measure = LevyMeasure("PiPsi" if exponent.kind == "Psi" else "PiPhi", exponent.r)
    integral = _quad(
        lambda z: -math.expm1(-lam * z) * measure.density(z), 0.0, np.inf)
    return abs(exponent.drift * lam + integral - exponent(lam))


def tail_symbol_check(exponent: LaplaceExponent, lam: float) -> float:
    """Residual of exponent(lam)/lam == drift + integral e^{-lam z} tail(z) dz."""
    measure = LevyMeasure("PiPsi" if exponent.kind == "Psi" else "PiPhi", exponent.r)
    integral = _quad(lambda z: math.exp(-lam * z) * measure.tail(z), 0.0, np.inf)
    return abs(exponent(lam) / lam - exponent.drift - integral)


# ---------------------------------------------------------------------------
# drifted reflected process (drift -2 sqrt(r), reflected at 0)


def hitting_time_laplace(lam: float, x: float, r: float) -> float:
    """E_x[e^{-lam tau_0}] = e^{-x (sqrt(lam+r) - sqrt(r))} for drift -2 sqrt(r)."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    return math.exp(-x * (math.sqrt(lam + r) - math.sqrt(r)))


def drifted_reflected_density(t: float, x: float, y, r: float) -> float:
    """Transition density of Brownian motion with drift -2 sqrt(r), reflected at 0."""
    if t <= 0:
        raise ValueError("t must be > 0")
    y = np.asarray(y, dtype=float)
    sr = math.sqrt(r)

    norm = math.sqrt(4.0 * math.pi * t)

    def one(yi):
        base = heat_kernel(t, yi - x) + heat_kernel(t, yi + x)
        if r > 0:
            # integrand decays like a Gaussian once the heat kernel dominates;
            # exponents are combined to avoid overflow at large yi
            w_max = sr * 2.0 * t + (x + yi) + math.sqrt(4.0 * t * 16.0 * math.log(10.0))
            base += 2.0 * sr * _quad(
                lambda w: math.exp(sr * w - (w + x + yi) ** 2 / (4.0 * t)) / norm,
                0.0, w_max)
        return math.exp(-r * t + sr * (x - yi)) * base

    if y.ndim:
        return np.array([one(float(yi)) for yi in y])
    return one(float(y))


def joint_laplace_drift(lam: float, y: float, w: float, r: float) -> float:
    """Joint transform e^{-sqrt(r)(y-w)} e^{-sqrt(lam+r)(y+w)} of (position, local
    time) for the drifted reflected motion."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    sr = math.sqrt(r)
    return math.exp(-sr * (y - w) - math.sqrt(lam + r) * (y + w))


# ---------------------------------------------------------------------------
# resolvents of the reversed process


def _dirichlet_green(x: float, y: float, lam: float, r: float) -> float:
    """Green function of u'' - 2 sqrt(r) u' - lam u with killing at 0."""
    s = math.sqrt(lam + r)
    sr = math.sqrt(r)
    # both exponents are <= 0 because s >= sr
    e = sr * (x - y)
    return (math.exp(e - abs(x - y) * s) - math.exp(e - (x + y) * s)) / (2.0 * s)


def resolvent_dirichlet(f: Callable[[float], float], x: float, lam: float,
                        r: float) -> float:
    """E_x[int_0^{tau_0} e^{-lam t} f(path_t) dt] for the drifted reflected motion
    killed at 0, by quadrature against the explicit Green function."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if x <= 0:
        return 0.0
    left = _quad(lambda y: _dirichlet_green(x, y, lam, r) * f(y), 0.0, x)
    right = _quad(lambda y: _dirichlet_green(x, y, lam, r) * f(y), x, np.inf)
    return left + right


def resolvent_at_zero(f: Callable[[float], float], lam: float, r: float) -> float:
    """Resolvent of the reversed process evaluated at the boundary point."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    s = math.sqrt(lam + r)
    sr = math.sqrt(r)
    direct = _quad(lambda y: math.exp(-y * (s + sr)) * f(y), 0.0, np.inf)
    if r > 0:
        jumps = _quad(
            lambda l: resolvent_dirichlet(f, l, lam, r) * r * math.exp(-sr * l),
            0.0, np.inf)
    else:
        jumps = 0.0
    return (direct + jumps) / psi(s - sr, r)


def resolvent_full(f: Callable[[float], float], x: float, lam: float,
                   r: float) -> float:
    """Resolvent of the reversed process: killed part plus boundary re-entry."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    return resolvent_dirichlet(f, x, lam, r) + hitting_time_laplace(
        lam, x, r) * resolvent_at_zero(f, lam, r)


def resolvent_boundary_identity_residual(f: Callable[[float], float], lam: float,
                                         r: float) -> float:
    """Residual of the non-local boundary condition applied to the resolvent:
    d/dx R f(0) + int (R f(y) - R f(0)) r e^{-sqrt(r) y} dy = 0."""
    h = 1e-5
    u0 = resolvent_full(f, 0.0, lam, r)
    du = (-resolvent_full(f, 2 * h, lam, r) + 4 * resolvent_full(f, h, lam, r)
          - 3 * u0) / (2 * h)
    sr = math.sqrt(r)
    nonlocal_part = _quad(
        lambda y: (resolvent_full(f, y, lam, r) - u0) * r * math.exp(-sr * y),
        0.0, np.inf)
    return abs(du + nonlocal_part)


# ---------------------------------------------------------------------------
# boundary symbols and the non-local boundary operator


def dn_symbol(xi, r: float):
    """Fourier symbol -xi^2/sqrt(xi^2+r) of the boundary flux operator."""
    xi = np.asarray(xi, dtype=float)
    out = -(xi * xi) / np.sqrt(xi * xi + r)
    return out if out.ndim else float(out)


def marchaud_apply(f: Callable[[float], float], x: float, r: float) -> float:
    """Non-local boundary operator int (f(x+y) - f(x)) r e^{-sqrt(r) y} dy."""
    if r <= 0:
        raise ValueError("r must be > 0")
    sr = math.sqrt(r)
    fx = f(x)
    return _quad(lambda y: (f(x + y) - fx) * r * math.exp(-sr * y), 0.0, np.inf)
