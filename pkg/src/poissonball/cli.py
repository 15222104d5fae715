"""Command line runner: ``poissonball constants | solve | verify``.

Reports are written as CSV with the columns

    row     running index of the report
    name    inequality or oracle checked
    n       dimension
    params  JSON object with the instance parameters (sorted keys)
    lhs     left-hand side (or measured error)
    rhs     right-hand side (or admissible error)
    margin  rhs - lhs
    pass    1 if margin >= -tolerance, else 0

plus a JSON summary (row counts, failures, worst margin overall and per
report name).  The exit status is 0 exactly when every row passes.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .core import admissibility_threshold, green_constant, schwarz_constant, surface_measure
from .estimates import EstimateReport
from .potential import BoundaryData, dirichlet_solution, solve_dirichlet
from .quadrature import CACHE_ENV, cached_rule
from .suites import SUITES, run_tasks, suite_tasks
from .maps import random_ball_points

COLUMNS = ("row", "name", "n", "params", "lhs", "rhs", "margin", "pass")
DEFAULTS = {
    "dim": 3,
    "level": 8,
    "seed": 0,
    "jobs": 1,
    "tol": None,
    "out": None,
    "domain": "ball:1",
    "suite": None,
    "a_frac": 0.99,
    "instances": 100,
}
_TYPES = {"dim": int, "level": int, "seed": int, "jobs": int, "tol": float,
          "a_frac": float, "instances": int, "out": str, "domain": str, "suite": str}
SOLVE_TOL = 1e-4
SOLVE_TOL_HARMONIC = 1e-8
SOLVE_FD_TOL = 1e-3


class ConfigError(ValueError):
    pass


def load_config(path):
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in _TYPES:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value' with key in "
                                  f"{sorted(_TYPES)}")
            try:
                out[key] = _TYPES[key](value.strip())
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}")
    return out


def resolve_config(args):
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


# -- output ---------------------------------------------------------------------------

def apply_tolerance(reports, tol):
    if tol is not None:
        for r in reports:
            r.tolerance = tol
    return reports


def to_csv(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for i, r in enumerate(reports):
        writer.writerow({"row": i, **r.row()})
    return buf.getvalue()


def summarize(reports):
    by_name = {}
    for r in reports:
        s = by_name.setdefault(r.name, {"count": 0, "failed": 0, "worst_margin": math.inf})
        s["count"] += 1
        s["failed"] += 0 if r.passed else 1
        m = r.margin if not math.isnan(r.margin) else -math.inf
        s["worst_margin"] = min(s["worst_margin"], m)
    failed = sum(s["failed"] for s in by_name.values())
    worst = min((s["worst_margin"] for s in by_name.values()), default=math.inf)
    return {"rows": len(reports), "passed": len(reports) - failed, "failed": failed,
            "worst_margin": worst, "by_name": by_name}


def _finite(obj):
    # strict JSON has no inf/nan; spell them as strings
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def emit(reports, cfg, stdout):
    table = to_csv(reports)
    summary = json.dumps(_finite(summarize(reports)), sort_keys=True, indent=1,
                         allow_nan=False)
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(table)
        with open(os.path.splitext(cfg["out"])[0] + ".json", "w") as fh:
            fh.write(summary + "\n")
        print(summary, file=stdout)
    else:
        stdout.write(table)
        print(summary, file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def _warm_rule_cache(cfg):
    # persist the base rules when a cache directory is configured
    if os.environ.get(CACHE_ENV):
        cached_rule("sphere", cfg["dim"], cfg["level"])
        cached_rule("ball", cfg["dim"], cfg["level"])


# -- subcommands ---------------------------------------------------------------------------

def constants_table(n_max=8):
    rows = []
    for n in range(3, n_max + 1):
        rows.append({"n": n, "omega": surface_measure(n), "c_n": green_constant(n),
                     "gamma_n": schwarz_constant(n), "C_n": admissibility_threshold(n),
                     "sqrt_n": math.sqrt(n)})
    return rows


def cmd_constants(args, stdout=sys.stdout):
    rows = constants_table(args.n_max)
    print(f"{'n':>2} {'omega_(n-1)':>14} {'c_n':>14} {'gamma_n':>14} {'C_n':>14} {'sqrt(n)':>14}",
          file=stdout)
    for r in rows:
        print(f"{r['n']:>2} {r['omega']:>14.10f} {r['c_n']:>14.10f} {r['gamma_n']:>14.10f} "
              f"{r['C_n']:>14.10f} {r['sqrt_n']:>14.10f}", file=stdout)
    return 0 if all(r["gamma_n"] < r["sqrt_n"] for r in rows) else 1


def solve_reports(n=3, level=8, seed=0, count=100, fd_points=5):
    """Dirichlet solver against closed-form solutions at random |x| <= 0.7."""
    rng = np.random.default_rng([seed, 0])
    X = random_ball_points(n, count, rng, 0.7)
    cases = [
        ("solve_square_norm", lambda E: np.ones(len(E)), 2.0 * n,
         lambda x: x @ x, SOLVE_TOL),
        ("solve_x1_squared", lambda E: E[:, 0] ** 2, 2.0,
         lambda x: x[0] ** 2, SOLVE_TOL),
        ("solve_harmonic", lambda E: E[:, 0] * E[:, 1], 0.0,
         lambda x: x[0] * x[1], SOLVE_TOL_HARMONIC),
        ("solve_exp_harmonic", lambda E: np.exp(E[:, 0]) * np.cos(E[:, 1]), 0.0,
         lambda x: np.exp(x[0]) * np.cos(x[1]), SOLVE_TOL),
    ]
    reports = []
    for name, f, g, exact, tol in cases:
        err = max(abs(solve_dirichlet(f, g, x, level) - exact(x)) for x in X)
        reports.append(EstimateReport(name, n, float(err), tol,
                                      {"level": level, "points": count, "g": g},
                                      tolerance=0.0))
    u = dirichlet_solution(BoundaryData(n, 1, lambda E: np.ones(len(E))), 2.0 * n, level)
    lap = u.lap(X[:fd_points])[:, 0]
    reports.append(EstimateReport("solve_fd_laplacian", n, float(np.max(np.abs(lap - 2 * n))),
                                  SOLVE_FD_TOL, {"level": level, "points": fd_points, "h": u.h_lap},
                                  tolerance=0.0))
    return reports


def cmd_solve(args, stdout=sys.stdout):
    cfg = resolve_config(args)
    _warm_rule_cache(cfg)
    reports = solve_reports(cfg["dim"], cfg["level"], cfg["seed"], cfg["instances"])
    return emit(apply_tolerance(reports, cfg["tol"]), cfg, stdout)


def cmd_verify(args, stdout=sys.stdout):
    cfg = resolve_config(args)
    if cfg["suite"] not in SUITES:
        raise ConfigError(f"unknown suite {cfg['suite']!r}; choose from {', '.join(SUITES)}")
    _warm_rule_cache(cfg)
    tasks = suite_tasks(cfg["suite"], n=cfg["dim"], level=cfg["level"], seed=cfg["seed"],
                        count=cfg["instances"], a_frac=cfg["a_frac"], domain=cfg["domain"])
    reports = run_tasks(tasks, cfg["jobs"])
    return emit(apply_tolerance(reports, cfg["tol"]), cfg, stdout)


def build_parser():
    parser = argparse.ArgumentParser(prog="poissonball",
                                     description="Gradient-estimate verification on the unit ball.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print omega, c_n, gamma_n and C_n")
    p.add_argument("--n-max", type=int, default=8)
    p.set_defaults(func=cmd_constants)

    def common(p):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--dim", type=int)
        p.add_argument("--level", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--tol", type=float, help="replace every report's pass tolerance")
        p.add_argument("--out", help="CSV path; the JSON summary goes next to it")
        p.add_argument("--instances", type=int, help="instances (or points) per family")

    p = sub.add_parser("solve", help="Dirichlet solver oracle checks")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run an estimate verification suite")
    common(p)
    p.add_argument("--suite", choices=SUITES)
    p.add_argument("--domain", help="ball:R or ellipsoid:a1,...,an (geometry suite)")
    p.add_argument("--a-frac", dest="a_frac", type=float,
                   help="largest a / C_n of the main-lemma sweep")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, stdout=sys.stdout):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, stdout=stdout)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"poissonball: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
