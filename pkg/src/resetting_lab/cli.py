"""Command-line entry point for simulation, PDE, trace and verification runs.

Exit codes: 0 all requested checks passed, 1 a verification failed,
2 usage/configuration error.  Reports are JSON lines (one VerificationReport
per line plus a summary object); files are written atomically.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import analytic, pde, reversal, stats, trace
from .core import ModelParams, RngStreamSpec, validate_params
from .simulate import (ProcessKind, inverse_local_time_samples,
                       pre_reset_position_samples, simulate, terminal_samples)

_F_CHOICES = {
    "expneg": lambda y: math.exp(-y),
    "gauss": lambda y: math.exp(-y * y),
}


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_reports(reports, args) -> int:
    lines = [r.to_json() for r in reports]
    n_fail = sum(not r.passed for r in reports)
    summary = {"summary": True, "total": len(reports), "failed": n_fail,
               "config": {k: v for k, v in vars(args).items()
                          if not callable(v) and k != "func"}}
    text = "\n".join(lines + [json.dumps(summary)]) + "\n"
    if getattr(args, "out", None):
        _atomic_write(args.out, text)
    if getattr(args, "format", "table") == "json":
        sys.stdout.write(text)
    else:
        for r in reports:
            print(r)
        print(f"{len(reports) - n_fail}/{len(reports)} checks passed")
    return 1 if n_fail else 0


def _params(args, half_line=True) -> ModelParams:
    dt = args.dt if args.dt is not None else 1e-4 * max(1.0, 1.0 / args.r
                                                        if args.r > 0 else 1.0)
    p = ModelParams(r=args.r, x0=getattr(args, "x0", 0.0), horizon=args.T,
                    dt=dt)
    errs = validate_params(p, half_line=half_line)
    if errs:
        raise SystemExit(f"invalid parameters: {'; '.join(errs)}")
    return p


def _cmd_simulate(args) -> int:
    kind = ProcessKind(args.kind)
    p = _params(args, half_line=kind.reflected)
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.paths):
        ap = simulate(kind, p, RngStreamSpec(args.seed, i))
        ap.write_csv(os.path.join(args.out, f"path_{i:04d}.csv"))
        if args.events_out:
            _atomic_write(os.path.join(args.events_out, f"events_{i:04d}.json"),
                          ap.path.events.to_json())
    return 0


def _cmd_reverse(args) -> int:
    p = _params(args)
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.paths):
        rp = reversal.build_x_tilde(p, RngStreamSpec(args.seed, 2 * i))
        rp.path.write_csv(os.path.join(args.out, f"xtilde_{i:04d}.csv"),
                          local_time=rp.composed_local_time)
        _atomic_write(os.path.join(args.out, f"xtilde_events_{i:04d}.json"),
                      rp.path.events.to_json())
    return 0


def _cmd_pde(args) -> int:
    f = _F_CHOICES[args.f]
    x_max = max(6.0 / math.sqrt(args.r) if args.r > 0 else 6.0,
                6.0 * math.sqrt(2.0 * args.T))
    grid = pde.FDGrid(x_max=x_max, nx=args.nx, nt=args.nt, t_max=args.T)
    if args.problem == "neumann":
        sol = pde.solve_resetting_neumann(f, args.r, grid)
    else:
        sol = pde.solve_nlbvp(f, args.r, grid)
    rows = ["t,x,u"]
    for i, t in enumerate(grid.t):
        for j, x in enumerate(grid.x):
            rows.append(f"{t},{x},{sol.u[i, j]}")
    _atomic_write(args.out, "\n".join(rows) + "\n")
    return 0


def _cmd_trace(args) -> int:
    p = ModelParams(r=args.r, horizon=1.0, dt=args.dt or 1e-3)
    rng = RngStreamSpec(args.seed, 0)
    if args.which == "oracle":
        ts = trace.truncated_levy_trace_oracle(args.r, args.t, args.eps_cut,
                                               rng, args.paths)
    else:
        ts = sample_trace_cli(args.which.upper(), p, rng, args.t, args.paths)
    rows = ["value"] + [str(v) for v in ts.values]
    _atomic_write(args.out, "\n".join(rows) + "\n")
    print(f"{ts.values.size} samples written ({ts.n_censored} censored)")
    return 0


def sample_trace_cli(which, p, rng, t, n):
    return trace.sample_trace(which, p, rng, t, n)


def _cmd_trace_verify(args) -> int:
    p = ModelParams(r=args.r, horizon=1.0, dt=args.dt or 1e-3)
    rng = RngStreamSpec(args.seed, 0)
    reports = []
    samples = trace.sample_trace("T1", p, rng, args.t, args.paths)
    for xi in (0.5, 1.0, 2.0):
        target = trace.trace_cf_target(xi, args.t, args.r)
        reports.append(stats.transform_check(
            samples.values, xi, target, name=f"trace_cf_T1(xi={xi})",
            seed=args.seed, kind="char"))
    return _emit_reports(reports, args)


def _suite_identities(args):
    reports = []
    lams = np.logspace(-3, 3, 50)
    worst = 0.0
    for r in (0.0, 0.5, 1.0, 4.0):
        for lam in lams:
            ph = analytic.phi(lam, r)
            worst = max(worst, analytic.psi_phi_identity_check(lam, r)
                        / max(ph, 1e-300))
    reports.append(stats.VerificationReport(
        "exponent_composition_identity", worst, 0.0, 1e-12, worst <= 1e-12,
        len(lams) * 4, args.seed))
    res = max(analytic.levy_khintchine_check(analytic.LaplaceExponent("Psi", 4.0), 2.0),
              analytic.levy_khintchine_check(analytic.LaplaceExponent("Phi", 1.0), 2.0))
    reports.append(stats.VerificationReport(
        "levy_khintchine_residual", res, 0.0, 1e-6, res <= 1e-6, 2, args.seed))
    res = max(analytic.tail_symbol_check(analytic.LaplaceExponent("Phi", 1.0), 2.0),
              analytic.tail_symbol_check(analytic.LaplaceExponent("Psi", 4.0), 1.0))
    reports.append(stats.VerificationReport(
        "tail_symbol_residual", res, 0.0, 1e-6, res <= 1e-6, 2, args.seed))
    xis = np.linspace(-10, 10, 201)
    res = max(abs(analytic.dn_symbol(xi, args.r) -
                  pde.assembled_k2_symbol(xi, args.r)) for xi in xis)
    reports.append(stats.VerificationReport(
        "boundary_symbol_match", res, 0.0, 1e-10, res <= 1e-10, len(xis),
        args.seed))
    return reports


def _suite_stationary(args):
    p = ModelParams(r=args.r, horizon=20.0, dt=args.dt or 1e-3)
    xs, _ = terminal_samples(ProcessKind("ReflectedResetting"), p,
                             RngStreamSpec(args.seed, 0), args.paths)
    sr = math.sqrt(args.r)
    rep = stats.ks_test(xs, lambda y: 1.0 - np.exp(-sr * y), alpha=0.01,
                        name=f"stationary_ks(r={args.r})", seed=args.seed)
    return [rep]


def _suite_localtime(args):
    p = ModelParams(r=args.r, horizon=1.0, dt=args.dt or 1e-3)
    rng = RngStreamSpec(args.seed, 0)
    reports = []
    times, _ = inverse_local_time_samples(ProcessKind("ReflectedResetting"),
                                          p, rng, 0.5, args.paths)
    for lam in (0.5, 1.0, 3.0):
        target = math.exp(-0.5 * analytic.phi(lam, args.r))
        reports.append(stats.transform_check(
            times, lam, target, name=f"clock_inverse_laplace(lam={lam})",
            seed=args.seed))
        reports.append(reversal.composed_local_time_law_check(
            p, RngStreamSpec(args.seed, 1), 0.5, lam, args.paths))
    return reports


def _suite_resets(args):
    p = ModelParams(r=args.r, horizon=100.0, dt=args.dt or 1e-3)
    d = pre_reset_position_samples(p, RngStreamSpec(args.seed, 0), args.paths)
    sr = math.sqrt(args.r)
    reports = [
        stats.ks_test(d["positions"], lambda y: 1.0 - np.exp(-sr * y),
                      name="pre_reset_positions", seed=args.seed),
        stats.ks_test(d["gaps"], lambda y: 1.0 - np.exp(-args.r * y),
                      name="inter_reset_gaps", seed=args.seed),
        stats.ks_test(d["local_times"], lambda y: 1.0 - np.exp(-sr * y),
                      name="inter_reset_local_times", seed=args.seed),
    ]
    return reports


def _suite_duality(args):
    p = ModelParams(r=args.r, horizon=0.5, dt=args.dt or 2e-3)
    return [stats.duality_two_point_test(p, RngStreamSpec(args.seed, 0), 0.5,
                                         n_paths=args.paths)]


def _suite_pde(args):
    # t_max long enough that the Laplace tail closure is negligible at lam=2
    grid = pde.FDGrid(x_max=8.0, nx=321, nt=2000, t_max=8.0)
    reports = []
    for problem in ("neumann", "nlbvp"):
        chk = pde.resolvent_consistency_check(
            lambda y: math.exp(-y), 2.0, args.r, grid, problem=problem)
        reports.append(stats.VerificationReport(
            f"resolvent_residual({problem})", chk["residual"], 0.0, 1e-3,
            chk["residual"] <= 1e-3, grid.nx, args.seed))
    return reports


def _suite_trace(args):
    p = ModelParams(r=args.r, horizon=1.0, dt=args.dt or 1e-3)
    s1 = trace.sample_trace("T1", p, RngStreamSpec(args.seed, 0), 1.0,
                            args.paths)
    s2 = trace.sample_trace("T2", p, RngStreamSpec(args.seed, 1), 1.0,
                            args.paths)
    reports = [stats.two_sample_ks_test(s1.values, s2.values,
                                        name="trace_T1_vs_T2",
                                        seed=args.seed)]
    for xi in (0.5, 1.0, 2.0):
        target = trace.trace_cf_target(xi, 1.0, args.r)
        reports.append(stats.transform_check(
            s1.values, xi, target, name=f"trace_cf(xi={xi})",
            seed=args.seed, kind="char"))
    return reports


_SUITES = {
    "identities": _suite_identities,
    "stationary": _suite_stationary,
    "localtime": _suite_localtime,
    "resets": _suite_resets,
    "duality": _suite_duality,
    "pde": _suite_pde,
    "trace": _suite_trace,
}


def _cmd_verify(args) -> int:
    if args.suite == "all":
        names = list(_SUITES)
    elif args.suite in _SUITES:
        names = [args.suite]
    else:
        raise SystemExit(f"unknown suite {args.suite!r}")
    reports = []
    for name in names:
        reports.extend(_SUITES[name](args))
    return _emit_reports(reports, args)


def _add_common(sp, paths_default=100_000):
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--paths", type=int, default=paths_default)
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="resetting-lab",
        description="Simulation and verification of reflected Brownian "
                    "motion with resetting, its time reversal, and their "
                    "boundary traces.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("simulate", help="write sample-path CSVs")
    _add_common(sp, paths_default=1)
    sp.add_argument("--kind", default="ReflectedResetting",
                    choices=["FreeBM", "ReflectedBM", "FreeResetting",
                             "ReflectedResetting", "DriftedReflected"])
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--events-out", default=None)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("reverse", help="write reversed-process path CSVs")
    _add_common(sp, paths_default=1)
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_reverse)

    sp = sub.add_parser("pde", help="solve a parabolic boundary problem")
    sp.add_argument("--problem", choices=["neumann", "nlbvp"],
                    default="neumann")
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--f", choices=sorted(_F_CHOICES), default="expneg")
    sp.add_argument("--nx", type=int, default=201)
    sp.add_argument("--nt", type=int, default=1000)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_pde)

    sp = sub.add_parser("trace", help="sample a boundary trace process")
    sp.add_argument("--which", choices=["t1", "t2", "oracle"], default="t1")
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--eps-cut", type=float, default=1e-6)
    sp.add_argument("--paths", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_trace)

    sp = sub.add_parser("trace-verify",
                        help="characteristic-function table for the trace")
    sp.add_argument("--r", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=["table", "json"], default="table")
    sp.set_defaults(func=_cmd_trace_verify)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", default="all",
                    help="one of: " + ", ".join(sorted(_SUITES)) + ", all")
    _add_common(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=["table", "json"], default="table")
    sp.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return 2
        return e.code if isinstance(e.code, int) else 2
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
