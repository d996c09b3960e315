"""Benchmark command line: solve, bench, rho-sweep, diagnose.

Outputs are JSON for single runs and CSV (comma, header row, LF) for
tables.  Relative output paths are resolved against $NLKACZMARZ_OUTDIR
when set.  Exit codes: 0 success, 2 usage error, 3 numerical breakdown,
4 diagnostic size guard exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys as _sys
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import diagnostics, kernels
from .problems import PROBLEM_NAMES, get_problem
from .solvers import Method, SolverConfig, Status, run
from .system import IterateState

CSV_HEADER = ["method", "problem", "n", "m", "rho", "iters",
              "final_residual_sq", "wall_ms", "seed", "repeats", "status"]

SUITE_SIZES = {
    "h-equation": [50, 100, 300, 500],
    "brown": [50, 100, 150, 200, 250, 300, 350, 400],
    "broyden": [50, 500, 700, 900, 1500, 2000],
    "overdetermined": [100, 300, 500, 1000, 2000],
}

BENCH_METHODS = [Method.MRNABK, Method.NGABK, Method.NRK, Method.RBCNK, Method.RDCNK]
STOCHASTIC = {Method.NRK, Method.RDCNK}
DIAG_SIZE_GUARD = 2000

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BREAKDOWN = 3
EXIT_SIZE_GUARD = 4


def _out_path(path: Optional[str]) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("NLKACZMARZ_OUTDIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _parse_params(items: Optional[List[str]]) -> Dict[str, float]:
    params: Dict[str, float] = {}
    for item in items or []:
        key, _, value = item.partition("=")
        if not _:
            raise ValueError(f"--param expects key=value, got {item!r}")
        params[key] = float(value)
    return params


def _initial_point(spec: str, problem) -> np.ndarray:
    if spec == "default":
        return problem.x0
    if spec == "zeros":
        return np.zeros(problem.system.n)
    if spec.startswith("const:"):
        return float(spec[6:]) * np.ones(problem.system.n)
    raise ValueError(f"unknown --x0 spec {spec!r} (use default, zeros, or const:<v>)")


def _timed_run(system, x0, cfg):
    t0 = time.perf_counter()
    report = run(system, x0, cfg)
    return report, (time.perf_counter() - t0) * 1e3


# -- solve ---------------------------------------------------------------


def cmd_solve(args) -> int:
    problem = get_problem(args.problem, args.n, _parse_params(args.param))
    cfg = SolverConfig(method=args.method, rho=args.rho, max_iters=args.max_iters,
                       tol_sq=args.tol_sq, seed=args.seed)
    x0 = _initial_point(args.x0, problem)
    report, wall_ms = _timed_run(problem.system, x0, cfg)

    payload = {
        "method": cfg.method.value,
        "problem": problem.name,
        "n": problem.system.n,
        "m": problem.system.m,
        "rho": cfg.rho if cfg.method is Method.MRNABK else None,
        "params": problem.params,
        "iters": report.iters,
        "final_residual_sq": report.final_residual_sq,
        "wall_ms": wall_ms,
        "seed": cfg.seed,
        "status": report.status.value,
        "message": report.message,
        "kernel_backend": kernels.BACKEND,
        "counters": vars(problem.system.counters),
    }
    out = _out_path(args.out)
    text = json.dumps(payload, indent=2)
    if out:
        out.write_text(text + "\n")
    print(text)

    if args.history:
        hist = _out_path(args.history)
        with hist.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "residual_sq", "block_size", "step_norm"])
            for row in report.history:
                writer.writerow([row[0], repr(row[1]), row[2], repr(row[3])])
    return EXIT_BREAKDOWN if report.status is Status.BREAKDOWN else EXIT_OK


# -- bench ---------------------------------------------------------------


def _bench_cell(suite: str, n: int, method: Method, rho: float, repeats: int,
                seed_base: int, max_iters: int, tol_sq: float) -> Dict:
    problem = get_problem(suite, n)
    stochastic = method in STOCHASTIC
    runs = []
    for r in range(repeats):
        seed = seed_base + r if stochastic else seed_base
        cfg = SolverConfig(method=method, rho=rho, max_iters=max_iters,
                           tol_sq=tol_sq, seed=seed)
        report, wall_ms = _timed_run(problem.system, problem.x0, cfg)
        runs.append({"seed": seed, "iters": report.iters, "wall_ms": wall_ms,
                     "final_residual_sq": report.final_residual_sq,
                     "status": report.status.value})
    iters = [r["iters"] for r in runs]
    statuses = [r["status"] for r in runs]
    status = next((s for s in statuses if s != Status.CONVERGED.value),
                  Status.CONVERGED.value)
    return {
        "method": method.value,
        "problem": suite,
        "n": problem.system.n,
        "m": problem.system.m,
        "rho": rho if method is Method.MRNABK else None,
        "iters": int(statistics.median_low(iters)),
        "iters_mean": statistics.fmean(iters),
        "iters_min": min(iters),
        "iters_max": max(iters),
        "final_residual_sq": statistics.median_low(r["final_residual_sq"] for r in runs),
        "wall_ms": statistics.fmean(r["wall_ms"] for r in runs),
        "seed": seed_base if stochastic else None,
        "repeats": repeats,
        "status": status,
        "runs": runs,
    }


def _write_table(rows: List[Dict], out: Optional[Path], json_out: Optional[Path]) -> None:
    def fmt(value):
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return value

    lines = [",".join(CSV_HEADER)]
    for row in rows:
        lines.append(",".join(str(fmt(row[c])) for c in CSV_HEADER))
    text = "\n".join(lines) + "\n"
    if out:
        out.write_text(text)
    else:
        _sys.stdout.write(text)
    if json_out:
        json_out.write_text(json.dumps(rows, indent=2) + "\n")


def cmd_bench(args) -> int:
    suites = list(SUITE_SIZES) if args.suite == "all" else [args.suite]
    sizes_override = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    rows = []
    for suite in suites:
        for n in sizes_override or SUITE_SIZES[suite]:
            for method in BENCH_METHODS:
                try:
                    rows.append(_bench_cell(suite, n, method, args.rho, args.repeats,
                                            args.seed_base, args.max_iters, args.tol_sq))
                except Exception as exc:  # record partial failures, keep going
                    rows.append({c: None for c in CSV_HEADER}
                                | {"method": method.value, "problem": suite, "n": n,
                                   "m": n, "repeats": args.repeats,
                                   "status": f"error:{exc}"})
    rows.sort(key=lambda r: (r["problem"], r["n"], r["method"]))
    _write_table(rows, _out_path(args.out), _out_path(args.json))
    return EXIT_OK


# -- rho sweep -----------------------------------------------------------


def cmd_rho_sweep(args) -> int:
    params = _parse_params(args.param)
    rhos = [float(v) for v in args.rhos.split(",")]
    sizes = [int(v) for v in args.sizes.split(",")]
    rows = []
    for n in sizes:
        problem = get_problem(args.problem, n, dict(params))
        for rho in rhos:
            cfg = SolverConfig(method=Method.MRNABK, rho=rho, max_iters=args.max_iters,
                               tol_sq=args.tol_sq)
            report, wall_ms = _timed_run(problem.system, problem.x0, cfg)
            rows.append({
                "method": Method.MRNABK.value, "problem": problem.name,
                "n": problem.system.n, "m": problem.system.m, "rho": rho,
                "iters": report.iters, "final_residual_sq": report.final_residual_sq,
                "wall_ms": wall_ms, "seed": None, "repeats": 1,
                "status": report.status.value,
            })
    rows.sort(key=lambda r: (r["n"], r["rho"]))
    _write_table(rows, _out_path(args.out), _out_path(args.json))
    return EXIT_OK


# -- diagnose ------------------------------------------------------------


def cmd_diagnose(args) -> int:
    if args.n > DIAG_SIZE_GUARD:
        print(f"diagnose: n={args.n} exceeds the dense-SVD size guard "
              f"({DIAG_SIZE_GUARD})", file=_sys.stderr)
        return EXIT_SIZE_GUARD
    problem = get_problem(args.problem, args.n, _parse_params(args.param))
    system = problem.system
    method = Method(args.method)
    if method not in (Method.NGABK, Method.MRNABK):
        print("diagnose: bounds exist for ngabk and mrnabk only", file=_sys.stderr)
        return EXIT_USAGE

    cfg = SolverConfig(method=method, rho=args.rho, max_iters=args.max_iters,
                       tol_sq=args.tol_sq, store_iterates=True)
    report, _ = _timed_run(system, problem.x0, cfg)

    rng = np.random.default_rng(args.seed)
    box = problem.sample_box
    radius = args.pair_radius
    if radius is None:
        radius = 0.05 * float((box[:, 1] - box[:, 0]).max())
    pairs = diagnostics.sample_pairs(box, args.pairs, radius, rng)
    # prefer the run's own limit point: convergence may pick a different
    # root than the analytically known one
    x_star = report.iterates[-1] if report.status is Status.CONVERGED else system.known_solution
    if x_star is not None:
        pairs += [(x, x_star) for x in report.iterates[:-1]]
    cone = diagnostics.estimate_cone(system, pairs)

    ratios = diagnostics.per_step_contraction(report, x_star) if x_star is not None else []
    steps = []
    from .solvers import select_mrnabk, select_ngabk
    for k, (x, hist) in enumerate(zip(report.iterates, report.history)):
        state = IterateState(x=x, fx=system.residual(x), k=k)
        sel = (select_ngabk(state.fx) if method is Method.NGABK
               else select_mrnabk(state.fx, args.rho))
        bound = diagnostics.theorem_bound(system, state, sel, cone.xi, method, args.rho)
        ordering = diagnostics.remark2_compare(bound, system, state, cone.xi)
        steps.append({
            "k": k,
            "residual_sq": hist[1],
            "block_size": bound.block_size,
            "rho_bound": bound.rho_bound,
            "sigma_min_full": bound.sigma_min_full,
            "sigma_max_block": bound.sigma_max_block,
            "applicable": bound.applicable,
            "measured_ratio": float(ratios[k]) if k < len(ratios) else None,
            "nrk_bound": ordering.rho_nrk,
            "ordering_strict": ordering.strict,
        })

    payload = {
        "problem": problem.name,
        "n": system.n,
        "m": system.m,
        "method": method.value,
        "rho": args.rho,
        "status": report.status.value,
        "iters": report.iters,
        "final_residual_sq": report.final_residual_sq,
        "cone": {"xi": cone.xi, "pairs_used": cone.pairs_used,
                 "condition_holds": cone.condition_holds},
        "steps": steps,
    }
    text = json.dumps(payload, indent=2)
    out = _out_path(args.out)
    if out:
        out.write_text(text + "\n")
    print(text)
    return EXIT_BREAKDOWN if report.status is Status.BREAKDOWN else EXIT_OK


# -- parser --------------------------------------------------------------


def _add_common_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--tol-sq", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="problem parameter, e.g. c=0.9 (repeatable)")
    p.add_argument("--out", help="output file (JSON for solve/diagnose, CSV for tables)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlkaczmarz",
                                     description="Averaged block nonlinear Kaczmarz benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one problem")
    p.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", required=True, choices=[m.value for m in Method])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", default="default",
                   help="default (the problem's standard start), zeros, or const:<v>")
    p.add_argument("--history", help="write per-iteration CSV to this path")
    _add_common_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a suite across all five iterative methods")
    p.add_argument("--suite", required=True, choices=list(SUITE_SIZES) + ["all"])
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--sizes", help="comma-separated size override")
    p.add_argument("--json", help="write per-repeat detail JSON to this path")
    _add_common_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rho-sweep", help="MRNABK relaxation-parameter sweep")
    p.add_argument("--problem", default="h-equation", choices=PROBLEM_NAMES)
    p.add_argument("--rhos", default="0.1,0.3,0.5,0.7,0.8,0.9")
    p.add_argument("--sizes", default="50,100")
    p.add_argument("--json", help="write detail JSON to this path")
    _add_common_solver_flags(p)
    p.set_defaults(func=cmd_rho_sweep)

    p = sub.add_parser("diagnose", help="cone estimate, contraction bounds, ordering report")
    p.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", default="ngabk")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--pair-radius", type=float, default=None,
                   help="absolute pair radius (default: 5%% of box extent)")
    p.add_argument("--seed", type=int, default=0)
    _add_common_solver_flags(p)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError) as exc:
        print(f"nlkaczmarz: {exc}", file=_sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
