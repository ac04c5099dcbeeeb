"""Command-line front end.

Exit codes: 0 when every requested check passes, 1 on a numerical failure,
2 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._kernel import BACKEND
from .config import _number, _numbers, load_config
from .errors import ConfigError, DomainEscape, FlowshiftError, NotGloballyPeriodic
from .flow import integrate, trajectory
from .reports import merge
from .shiftmap import ShiftFunction, shift_on_grid
from .suites import execute, validate_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _global_flags():
    # defaults are SUPPRESS so the flags may be given before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="scenario YAML (default: the shipped config)")
    p.add_argument("--output-dir", default=S, help="directory for JSON and CSV reports")
    p.add_argument("--rtol", type=float, default=S, help="integrator relative tolerance")
    p.add_argument("--atol", type=float, default=S, help="integrator absolute tolerance")
    p.add_argument("--seed", type=int, default=S, help="seed for grid jitter and sampled suites")
    p.add_argument("--parallel", type=int, default=S, metavar="N",
                   help="run suites in N worker processes (`suite` and `all`)")
    return p


def build_parser():
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="flowshift", parents=[common],
                                     description="Numerical checks for shift maps of vector-field flows.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", parents=[common], help="integrate one point of a field")
    p.add_argument("--field", required=True)
    p.add_argument("--point", nargs="+", required=True)
    p.add_argument("--time", default="1")
    p.add_argument("--horizon", nargs=2, metavar=("LO", "HI"),
                   help="also report the integrable horizon inside [LO, HI]")

    p = sub.add_parser("shift", parents=[common], help="apply a shift map on a grid")
    p.add_argument("--field", required=True)
    p.add_argument("--alpha", required=True, help="scalar name or number")
    p.add_argument("--grid", required=True)
    p.add_argument("--identity", action="store_true", help="check that the map is the identity")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("reparam-check", parents=[common], help="bridge and image-equality checks for a pair")
    p.add_argument("--pair", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--s-values", nargs="+", default=["0.1", "1", "pi"])
    p.add_argument("--gammas", nargs="*", default=["0.4", "1", "2"])
    p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("pushforward-check", parents=[common], help="pushforward identity for a case")
    p.add_argument("--case", required=True)
    p.add_argument("--step", type=float)
    p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("period", parents=[common], help="minimal periods and theta on a grid")
    p.add_argument("--field", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--t-max", default="20")
    p.add_argument("--expect", choices=["periodic", "non_periodic"], default="periodic")

    p = sub.add_parser("circle-normalize", parents=[common], help="certify G = theta F as a circle action")
    p.add_argument("--field", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--t-max", default="20")
    p.add_argument("--scheme", choices=["auto", "closed_form", "radial", "linear", "nearest"], default="auto")

    p = sub.add_parser("linearize", parents=[common], help="linear part at a singular point")
    p.add_argument("--field", required=True)
    p.add_argument("--point", nargs="+", required=True)
    p.add_argument("--certify-grid", help="grid for the circle-action certificate")

    p = sub.add_parser("suite", parents=[common], help="run named suites from the config")
    p.add_argument("names", nargs="+")

    sub.add_parser("all", parents=[common], help="run every suite in the config")
    return parser


def _overrides(args):
    return {k: getattr(args, k, None) for k in ("rtol", "atol", "output_dir", "seed")}


def _load(args):
    return load_config(getattr(args, "config", None), _overrides(args))


def write_report(rep, out_dir: Path, json_path=None):
    """Write <suite>.json and <suite>.csv; file names are derived from the suite name."""
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = "".join(c if c.isalnum() or c in "-_." else "_" for c in rep.suite_name)
    Path(json_path or out_dir / f"{stem}.json").write_text(rep.to_json() + "\n", encoding="utf-8")
    (out_dir / f"{stem}.csv").write_text(rep.residual_csv(), encoding="utf-8")


def verdict_line(rep):
    status = "PASS" if rep.passed else "FAIL"
    return (f"{status}  {rep.suite_name:<36} max={rep.max_residual:.3e} tol={rep.tolerance:.1e} "
            f"n={rep.n_points} ({rep.wall_time:.2f}s)")


def _run_adhoc(args, suite, json_path=None):
    sc = _load(args)
    suite = validate_suite(sc, suite)
    rep = execute(sc, suite, getattr(args, "seed", 0))
    write_report(rep, sc.output_dir, json_path)
    print(verdict_line(rep))
    for f in rep.failures[:5]:
        print(f"  failure: {f}")
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _worker(config, overrides, name, seed):
    sc = load_config(config, overrides)
    return execute(sc, sc.suite(name), seed)


def run_suites(args, names=None):
    sc = _load(args)
    names = [s["name"] for s in sc.suites] if names is None else names
    for n in names:
        sc.suite(n)  # unknown names are config errors
    seed = getattr(args, "seed", 0)
    workers = getattr(args, "parallel", 1) or 1
    t0 = time.perf_counter()
    if workers > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_worker, getattr(args, "config", None), _overrides(args), n, seed)
                       for n in names]
            reports = [f.result() for f in futures]
    else:
        reports = [execute(sc, sc.suite(n), seed) for n in names]
    # reports are written in config order regardless of completion order
    for rep in reports:
        write_report(rep, sc.output_dir)
        print(verdict_line(rep))
    n_pass = sum(r.passed for r in reports)
    summary = {"suites": len(reports), "passed": n_pass, "failed": len(reports) - n_pass,
               "verdicts": {r.suite_name: r.passed for r in reports}, "backend": BACKEND,
               "config": sc.source}
    sc.output_dir.mkdir(parents=True, exist_ok=True)
    (sc.output_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"{n_pass}/{len(reports)} suites passed in {time.perf_counter() - t0:.1f}s")
    return EXIT_PASS if n_pass == len(reports) else EXIT_FAIL


def cmd_flow(args):
    sc = _load(args)
    F = sc.field(args.field)
    x = np.array(_numbers(args.point, "--point"))
    if x.size != F.dimension:
        raise ConfigError(f"--point has {x.size} coordinates, {F.name} needs {F.dimension}")
    t = _number(args.time, "--time")
    out = {"field": F.name, "point": x.tolist(), "time": t}
    code = EXIT_PASS
    try:
        out["image"] = integrate(F, x, t, sc.integrator).tolist()
    except DomainEscape as exc:
        out["escape"] = {"reason": exc.reason.value, "t_reached": exc.t_reached}
        code = EXIT_FAIL
    if F.analytic_flow is not None and "image" in out:
        try:
            out["analytic"] = np.asarray(F.analytic_flow(x, t)).tolist()
            out["discrepancy"] = F.space.distance(np.array(out["image"]), np.array(out["analytic"]))
        except FlowshiftError:
            pass
    if args.horizon:
        lo, hi = _number(args.horizon[0], "--horizon"), _number(args.horizon[1], "--horizon")
        tr = trajectory(F, x, (lo, hi), sc.integrator)
        out["horizon"] = {"t_lo_reached": tr.t_lo_reached, "t_hi_reached": tr.t_hi_reached,
                          "escape_lo": tr.escape_reason_lo.value, "escape_hi": tr.escape_reason_hi.value}
    print(json.dumps(out, indent=2))
    return code


def cmd_shift(args):
    if args.identity:
        return _run_adhoc(args, {"name": f"shift-{args.field}", "kind": "shift_compare", "field": args.field,
                                 "alpha": args.alpha, "grid": args.grid, "tol": args.tol})
    sc = _load(args)
    F, grid = sc.field(args.field), sc.grid(args.grid)
    alpha = sc.scalar(args.alpha) if args.alpha in sc.scalars else _number(args.alpha, "--alpha")
    img = shift_on_grid(ShiftFunction(alpha, F), grid, sc.integrator)
    sc.output_dir.mkdir(parents=True, exist_ok=True)
    lines = ["point,image"]
    for p, q in zip(grid, img.images):
        lines.append(f"{' '.join(repr(float(v)) for v in p)},{' '.join(repr(float(v)) for v in q)}")
    path = sc.output_dir / f"shift-{args.field}.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(grid)} images to {path}")
    return EXIT_PASS


def cmd_reparam(args):
    sc = _load(args)
    name = f"reparam-{args.pair}"
    parts = []
    for suite in ({"name": f"{name}:bridge", "kind": "bridge", "pair": args.pair, "grid": args.grid,
                   "s_values": args.s_values},
                  {"name": f"{name}:image", "kind": "image_equality", "pair": args.pair, "grid": args.grid,
                   "gammas": args.gammas}):
        if suite["kind"] == "image_equality" and not args.gammas:
            continue
        parts.append(execute(sc, validate_suite(sc, suite), getattr(args, "seed", 0)))
    rep = merge(name, parts, identity=" and ".join(p.identity for p in parts))
    rep.wall_time = sum(p.wall_time for p in parts)
    write_report(rep, sc.output_dir, args.report)
    for p in parts:
        print(verdict_line(p))
    print(verdict_line(rep))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_pushforward(args):
    suite = {"name": f"pushforward-{args.case}", "kind": "pushforward", "case": args.case}
    if args.step is not None:
        suite["step"] = args.step
    return _run_adhoc(args, suite, args.report)


def cmd_period(args):
    return _run_adhoc(args, {"name": f"period-{args.field}", "kind": "period", "field": args.field,
                             "grid": args.grid, "t_max": args.t_max, "expect": args.expect})


def cmd_circle(args):
    return _run_adhoc(args, {"name": f"circle-{args.field}", "kind": "circle_normalize", "field": args.field,
                             "grid": args.grid, "t_max": args.t_max, "scheme": args.scheme})


def cmd_linearize(args):
    suite = {"name": f"linearize-{args.field}", "kind": "linear_part", "field": args.field,
             "points": [args.point]}
    if args.certify_grid:
        suite["certify_grid"] = args.certify_grid
    code = _run_adhoc(args, suite)
    sc = _load(args)
    rep = json.loads((sc.output_dir / f"linearize-{args.field}.json").read_text())
    for lp in rep.get("extra", {}).get("reports", []):
        print(f"  rates={lp['rotation_rates']} zero_block_dim={lp['zero_block_dim']} "
              f"eigenvalues={lp['eigenvalues']}")
    return code


COMMANDS = {
    "flow": cmd_flow,
    "shift": cmd_shift,
    "reparam-check": cmd_reparam,
    "pushforward-check": cmd_pushforward,
    "period": cmd_period,
    "circle-normalize": cmd_circle,
    "linearize": cmd_linearize,
    "suite": lambda a: run_suites(a, a.names),
    "all": lambda a: run_suites(a),
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NotGloballyPeriodic as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlowshiftError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
