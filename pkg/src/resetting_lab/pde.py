"""Finite-difference solvers for the two parabolic boundary problems and
Fourier-space reference solutions for the elliptic half-plane problems.

Problem A (resetting / Neumann):   u_t = u_xx + r (u(t,0) - u(t,x)),
                                   u_x(t,0) = 0.
Problem B (drifted / non-local):   u_t = u_xx - 2 sqrt(r) u_x,
                                   u_x(t,0) + int (u(t,y)-u(t,0))
                                              r e^{-sqrt(r) y} dy = 0.

Both are theta-schemes (theta = 1/2 by default) on a uniform grid truncated
at x_max with a homogeneous Neumann far boundary; the non-local boundary row
is assembled implicitly from trapezoid weights plus an analytic tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.sparse import lil_matrix, csc_matrix, identity
from scipy.sparse.linalg import splu

from . import analytic


@dataclass(frozen=True)
class FDGrid:
    x_max: float
    nx: int
    nt: int
    t_max: float

    def __post_init__(self):
        if self.nx < 16:
            raise ValueError("nx must be >= 16")
        if self.x_max <= 0 or self.t_max <= 0 or self.nt < 1:
            raise ValueError("grid extents must be positive")

    @property
    def dx(self) -> float:
        return self.x_max / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.t_max / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.nt + 1)


@dataclass
class FDSolution:
    grid: FDGrid
    u: np.ndarray  # (nt+1, nx)
    scheme: str

    def at(self, t: float, x: float) -> float:
        """Bilinear interpolation of the solution."""
        ti = np.clip(t / self.grid.dt, 0, self.grid.nt)
        xi = np.clip(x / self.grid.dx, 0, self.grid.nx - 1)
        i0, j0 = int(ti), int(xi)
        i1, j1 = min(i0 + 1, self.grid.nt), min(j0 + 1, self.grid.nx - 1)
        ft, fx = ti - i0, xi - j0
        return float((1 - ft) * ((1 - fx) * self.u[i0, j0] + fx * self.u[i0, j1])
                     + ft * ((1 - fx) * self.u[i1, j0] + fx * self.u[i1, j1]))

    def max_principle_violation(self, f_vals: np.ndarray) -> float:
        lo, hi = float(np.min(f_vals)), float(np.max(f_vals))
        return max(float(np.max(self.u)) - hi, lo - float(np.min(self.u)), 0.0)


def _sample_f(f, x):
    return np.asarray([f(xi) for xi in x], dtype=float)


def solve_resetting_neumann(f, r: float, grid: FDGrid,
                            theta: float = 0.5) -> FDSolution:
    """Expectation semigroup of the reflected resetting process.

    The reset coupling r*u(t,0) is linear in u and assembled implicitly
    (a dense column on node 0), keeping the theta-scheme unconditionally
    stable.
    """
    nx, dx, dt = grid.nx, grid.dx, grid.dt
    L = lil_matrix((nx, nx))
    c = 1.0 / (dx * dx)
    for i in range(nx):
        if i == 0:
            L[0, 0] += -2.0 * c   # ghost-point Neumann: u_xx ~ 2(u1-u0)/dx^2
            L[0, 1] += 2.0 * c
        elif i == nx - 1:
            L[i, i] += -2.0 * c
            L[i, i - 1] += 2.0 * c
        else:
            L[i, i - 1] += c
            L[i, i] += -2.0 * c
            L[i, i + 1] += c
        L[i, i] += -r
        L[i, 0] += r
    L = csc_matrix(L)
    Ieye = identity(nx, format="csc")
    lhs = splu(csc_matrix(Ieye - dt * theta * L))
    rhs = Ieye + dt * (1.0 - theta) * L

    u = np.empty((grid.nt + 1, nx))
    u[0] = _sample_f(f, grid.x)
    for n in range(grid.nt):
        u[n + 1] = lhs.solve(rhs @ u[n])
    return FDSolution(grid=grid, u=u, scheme=f"theta={theta} neumann")


def _nonlocal_boundary_row(r: float, grid: FDGrid) -> np.ndarray:
    """Weights w such that w @ u approximates
    u_x(0) + int (u(y) - u(0)) r e^{-sqrt(r) y} dy."""
    nx, dx = grid.nx, grid.dx
    sr = math.sqrt(r)
    w = np.zeros(nx)
    # second-order one-sided derivative at 0
    w[0] += -3.0 / (2.0 * dx)
    w[1] += 4.0 / (2.0 * dx)
    w[2] += -1.0 / (2.0 * dx)
    kern = r * np.exp(-sr * grid.x)
    trap = np.full(nx, dx)
    trap[0] = trap[-1] = dx / 2.0
    w += trap * kern
    w[0] -= np.sum(trap * kern)
    # analytic tail beyond x_max, assuming u ~ u(x_max) there
    tail = sr * math.exp(-sr * grid.x_max)
    w[-1] += tail
    w[0] -= tail
    return w


def solve_nlbvp(f, r: float, grid: FDGrid, theta: float = 0.5) -> FDSolution:
    """Expectation semigroup of the reversed process: upwinded
    drift-diffusion interior with the implicit non-local boundary row."""
    if r <= 0:
        raise ValueError("r must be > 0 for the non-local problem")
    nx, dx, dt = grid.nx, grid.dx, grid.dt
    b = -2.0 * math.sqrt(r)
    c = 1.0 / (dx * dx)
    L = lil_matrix((nx, nx))
    for i in range(1, nx - 1):
        L[i, i - 1] += c
        L[i, i] += -2.0 * c
        L[i, i + 1] += c
        # upwind for negative drift: b*u_x ~ b*(u_i - u_{i-1})/dx
        L[i, i - 1] += -b / dx
        L[i, i] += b / dx
    L = csc_matrix(L)

    w = _nonlocal_boundary_row(r, grid)
    A = lil_matrix(identity(nx, format="lil") - dt * theta * L)
    A[0, :] = w                            # algebraic boundary row
    A[nx - 1, :] = 0.0
    A[nx - 1, nx - 1] = 1.0 / dx           # far-field Neumann
    A[nx - 1, nx - 2] = -1.0 / dx
    lhs = splu(csc_matrix(A))
    rhs = identity(nx, format="csc") + dt * (1.0 - theta) * L

    u = np.empty((grid.nt + 1, nx))
    u[0] = _sample_f(f, grid.x)
    for n in range(grid.nt):
        rvec = rhs @ u[n]
        rvec[0] = 0.0
        rvec[nx - 1] = 0.0
        u[n + 1] = lhs.solve(rvec)
    return FDSolution(grid=grid, u=u, scheme=f"theta={theta} nlbvp")


# ---------------------------------------------------------------------------
# resolvent cross-checks


def _solution_laplace(sol: FDSolution, lam: float, x: float) -> float:
    """Time-quadrature Laplace transform of the FD solution at x, with the
    exponential tail closed using the final value."""
    tg = sol.grid.t
    vals = np.array([sol.at(t, x) for t in tg])
    lt = float(np.trapezoid(np.exp(-lam * tg) * vals, tg))
    lt += vals[-1] * math.exp(-lam * tg[-1]) / lam
    return lt


def analytic_resolvent_resetting(f, x: float, lam: float, r: float) -> float:
    """Resolvent of the reflected resetting process via the reflected BM
    resolvent at the shifted rate."""
    mu = lam + r

    def neumann_res(x0):
        smu = math.sqrt(mu)

        def g(y):
            return (math.exp(-abs(x0 - y) * smu)
                    + math.exp(-(x0 + y) * smu)) / (2.0 * smu) * f(y)

        a, _ = integrate.quad(g, 0.0, x0, epsabs=1e-11, limit=200)
        bq, _ = integrate.quad(g, x0, np.inf, epsabs=1e-11, limit=200)
        return a + bq

    return neumann_res(x) + (r / lam) * neumann_res(0.0)


def resolvent_consistency_check(f, lam: float, r: float, grid: FDGrid,
                                problem: str = "neumann",
                                xs=(0.2, 0.5, 1.0)) -> dict:
    """Sup residual between the time-quadrature Laplace transform of the FD
    solution and the analytic resolvent, at a few interior points."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    truncation = math.exp(-lam * grid.t_max)
    if problem == "neumann":
        sol = solve_resetting_neumann(f, r, grid)
        targets = [analytic_resolvent_resetting(f, x, lam, r) for x in xs]
    elif problem == "nlbvp":
        sol = solve_nlbvp(f, r, grid)
        targets = [analytic.resolvent_full(f, x, lam, r) for x in xs]
    else:
        raise ValueError(f"unknown problem {problem!r}")
    got = [_solution_laplace(sol, lam, x) for x in xs]
    resid = max(abs(g - t) for g, t in zip(got, targets))
    return {
        "residual": resid,
        "points": list(xs),
        "numeric": got,
        "analytic": targets,
        "truncation_warning": bool(truncation > 1e-6),
    }


# ---------------------------------------------------------------------------
# half-plane Fourier multipliers


def halfplane_fourier_solution(problem: str, xi: float, y: float,
                               r: float) -> float:
    """Fourier multiplier mapping boundary data to the solution at height y.

    P1 is the resetting half-plane problem, P2 the drifted/non-local one.
    """
    if y < 0:
        raise ValueError("y must be >= 0")
    s = math.sqrt(xi * xi + r)
    if problem == "P1":
        if s == 0.0:
            return 1.0
        return (xi * xi / (s * s)) * math.exp(-y * s) + r / (s * s)
    if problem == "P2":
        return math.exp(-y * (s - math.sqrt(r)))
    raise ValueError(f"unknown problem {problem!r}")


def assembled_k2_symbol(xi: float, r: float) -> float:
    """Boundary flux symbol of P2: vertical derivative of the multiplier at
    y=0 plus the non-local boundary term applied to the multiplier profile."""
    s = math.sqrt(xi * xi + r)
    sr = math.sqrt(r)
    derivative = -(s - sr)
    if r > 0:
        # int (e^{-y(s-sr)} - 1) r e^{-sr y} dy = r/s - sr
        nonlocal_term = r / s - sr
    else:
        nonlocal_term = 0.0
    return derivative + nonlocal_term


def assembled_k2_symbol_quadrature(xi: float, r: float) -> float:
    """Same assembly with the non-local term done by quadrature (cross-check)."""
    s = math.sqrt(xi * xi + r)
    sr = math.sqrt(r)
    h = 1e-6
    deriv = (halfplane_fourier_solution("P2", xi, h, r) - 1.0) / h
    if r > 0:
        nl = analytic.marchaud_apply(
            lambda y: halfplane_fourier_solution("P2", xi, y, r), 0.0, r)
    else:
        nl = 0.0
    return deriv + nl
