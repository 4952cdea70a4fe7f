"""Command line front end.

    proxkl solve --config run.json [--out-dir DIR] [--eps TOL] [--max-iter N]
    proxkl suite [--out-dir DIR] [--jobs N]
    proxkl check --trace trace.csv --report report.json [--l-est L]

Exit codes: 0 success, 1 solver error status or failed certificate,
2 usage or configuration error.
"""

import argparse
import csv
import dataclasses
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import analysis
from .config import ConfigError, load_config, parse_problem
from .problems import REGISTRY, get_problem
from .serialize import (RunArtifact, problem_echo, read_report_json, read_trace_csv,
                        write_report_json, write_trace_csv)
from .solver import SolverConfig, solve

DESCENT_TOL = 1e-10
SUBGRAD_TOL = 1e-6


def run_problem(spec, cfg, out_dir):
    """Solve ``spec`` and write ``trace.csv`` and ``report.json`` into ``out_dir``."""
    f, phi = spec.build()
    report = solve(f, phi, spec.x0, cfg)
    rate = None
    if not report.status.is_error:
        try:
            rate = analysis.rate_report(report)
        except ValueError:
            rate = None
    artifact = RunArtifact(report, cfg, problem_echo(spec), rate)
    os.makedirs(out_dir, exist_ok=True)
    write_trace_csv(report.trace, os.path.join(out_dir, "trace.csv"))
    write_report_json(artifact, os.path.join(out_dir, "report.json"))
    return artifact


def _summary_row(name, artifact):
    r = artifact.report
    return {"name": name, "status": r.status.value, "iterations": r.iterations,
            "final_psi": repr(float(r.final_psi)),
            "final_residual": repr(float(r.final_residual)),
            "wall_time": f"{r.wall_time:.4f}"}


def _suite_job(args):
    name, out_dir = args
    spec = get_problem(name)
    return _summary_row(name, run_problem(spec, SolverConfig(), os.path.join(out_dir, name)))


def cmd_solve(args):
    spec, cfg = load_config(args.config)
    overrides = {}
    if args.eps is not None:
        overrides["eps_tol"] = args.eps
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    try:
        cfg = dataclasses.replace(cfg, **overrides)
    except ValueError as err:
        raise ConfigError("", f"command line override: {err}") from None
    artifact = run_problem(spec, cfg, args.out_dir)
    r = artifact.report
    print(f"{spec.name}: {r.status.value} after {r.iterations} iterations, "
          f"psi = {r.final_psi!r}, residual = {r.final_residual:.3e}")
    return 1 if r.status.is_error else 0


def cmd_suite(args):
    jobs = [(name, args.out_dir) for name in REGISTRY]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_suite_job, jobs))
    else:
        rows = [_suite_job(job) for job in jobs]
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "summary.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    width = max(len(row["name"]) for row in rows)
    print(f"{'name':<{width}}  {'status':<16} {'iters':>7}  {'residual':>10}")
    for row in rows:
        print(f"{row['name']:<{width}}  {row['status']:<16} {row['iterations']:>7}  "
              f"{float(row['final_residual']):>10.3e}")
    return 1 if any(row["status"] not in ("Converged", "MaxIterations") for row in rows) else 0


def cmd_check(args):
    trace = read_trace_csv(args.trace)
    artifact = read_report_json(args.report)
    report = artifact.report
    if [(r.k, r.psi, r.gamma) for r in trace] != [(r.k, r.psi, r.gamma) for r in report.trace]:
        print("trace and report disagree", file=sys.stderr)
        return 1
    ok = True
    delta = artifact.config_echo.delta
    margin = analysis.check_descent_certificate(trace, delta)
    bound = -DESCENT_TOL * (1.0 + abs(trace[0].psi)) if trace else 0.0
    passed = margin >= bound
    ok &= passed
    print(f"descent margin     {margin: .3e}  (>= {bound:.1e})  {'ok' if passed else 'FAIL'}")

    rate = analysis.rate_report(report)
    print(f"q factor (psi)     {rate.q_factor_psi: .6f}")
    print(f"r factor (x)       {rate.r_factor_x: .6f}")

    spec = parse_problem(artifact.problem_echo["spec"])
    if spec.digest() != artifact.problem_echo["digest"]:
        print("problem digest mismatch", file=sys.stderr)
        return 1
    f, phi = spec.build()
    L_est = args.l_est if args.l_est is not None else f.lipschitz_hint
    if phi.subdiff_dist is None or L_est is None:
        print("subgradient ratio  n/a (no Lipschitz estimate; pass --l-est)")
    else:
        ratio = analysis.check_subgrad_bound(report.trace, f, phi, L_est)
        passed = ratio <= 1.0 + SUBGRAD_TOL
        ok &= passed
        print(f"subgradient ratio  {ratio: .6f}  (<= 1 + {SUBGRAD_TOL:g})  "
              f"{'ok' if passed else 'FAIL'}")
    if report.status.is_error:
        print(f"run ended with {report.status.value}")
        ok = False
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="proxkl", description="Backtracking proximal gradient solver and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one configured problem")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--eps", type=float)
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("suite", help="solve every registry problem with defaults")
    p.add_argument("--out-dir", default="suite")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("check", help="verify certificates on a stored run")
    p.add_argument("--trace", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--l-est", type=float)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if getattr(args, "jobs", 1) < 1:
        parser.print_usage(sys.stderr)
        print("proxkl: error: --jobs must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
