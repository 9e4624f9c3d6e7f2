"""Command-line interface: bound tables, sharp constants, verification reports.

Output is deterministic byte-for-byte for fixed flags and seeds: numbers are
rendered at 15 significant digits, JSON keys are sorted, and no timestamps
are emitted.  Exit codes: 0 success, 1 computational failure or verification
violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .bound import conjugate, factor_curve, sharp_gradient_constant
from .errors import BracketFailureError, ConvergenceError, NearBoundaryError
from .extremal import gradient_extremal_check, sharpness_report
from .harmonics import check_corollary, check_schwarz, random_harmonic

_SOLVER_ERRORS = (
    ArithmeticError,
    BracketFailureError,
    ConvergenceError,
    NearBoundaryError,
)


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _json_ready(obj):
    if isinstance(obj, float):
        return float(_fmt(obj)) if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise UsageError(f"cannot parse p from {text!r}") from None
    if not p >= 1.0:
        raise UsageError("p must be >= 1")
    return p


def _parse_grid(text: str):
    text = text.strip()
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise UsageError("grid range must be start:stop:step")
        try:
            start, stop, step = (float(s) for s in pieces)
        except ValueError:
            raise UsageError(f"cannot parse grid range {text!r}") from None
        if step <= 0:
            raise UsageError("grid step must be positive")
        count = int(round((stop - start) / step))
        grid = [start + k * step for k in range(count + 1) if start + k * step <= stop + 1e-12]
    else:
        try:
            grid = [float(s) for s in text.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"cannot parse grid {text!r}") from None
    if not grid:
        raise UsageError("grid is empty")
    arr = np.asarray(grid, dtype=float)
    if np.any(np.diff(arr) <= 0):
        raise UsageError("grid must be strictly increasing")
    if arr[0] < 0.0 or arr[-1] >= 0.999:
        raise UsageError("grid must lie in [0, 0.999)")
    return arr


def _base_meta(args, p: float) -> dict:
    ex = conjugate(p)
    meta = {
        "tool": "harmonic-schwarz",
        "version": __version__,
        "p": "inf" if p == math.inf else p,
        "q": "inf" if ex.q == math.inf else ex.q,
        "n": args.n,
        "nodes": args.nodes if getattr(args, "nodes", None) else "auto",
        "solver_rtol": 1e-13,
    }
    if getattr(args, "seed", None) is not None:
        meta["seed"] = args.seed
    return meta


def _emit(args, meta: dict, rows=None, report=None) -> None:
    if args.format == "json":
        payload = {"meta": meta}
        if rows is not None:
            payload["rows"] = rows
        if report is not None:
            payload["report"] = report
        text = json.dumps(_json_ready(payload), sort_keys=True, indent=2) + "\n"
    else:
        lines = [f"# {key} = {value}" for key, value in sorted(meta.items())]
        if rows is not None:
            lines.append("r,a_star,g_p")
            for row in rows:
                lines.append(
                    ",".join(_fmt(row[k]) for k in ("r", "a_star", "g_p"))
                )
        elif report is not None:
            items = sorted(report.items())
            lines.append(",".join(str(k) for k, _ in items))
            lines.append(
                ",".join(
                    _fmt(v) if isinstance(v, float) else str(v) for _, v in items
                )
            )
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_gp(args) -> int:
    p = _parse_p(args.p)
    grid = _parse_grid(args.r_grid)
    try:
        curve = factor_curve(conjugate(p), args.n, grid, nodes=args.nodes)
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    rows = [
        {"r": pt.r, "a_star": pt.shift, "g_p": pt.bound} for pt in curve.points
    ]
    _emit(args, _base_meta(args, p), rows=rows)
    return 0


def _cmd_sharp_constant(args) -> int:
    p = _parse_p(args.p)
    value = sharp_gradient_constant(conjugate(p), args.n)
    meta = _base_meta(args, p)
    if p == 1.0:
        meta["limit_case"] = "p=1 constant is the q->inf limit n*sup|eta_n| = n"
    if args.format == "json":
        _emit(args, meta, report={"sharp_gradient_constant": value})
    else:
        _emit(args, meta, report={"sharp_gradient_constant": value})
    return 0


def _verify_exit(args, meta, checks) -> int:
    passed = all(c["pass"] for c in checks)
    report = {
        "checks": checks,
        "pass": passed,
        "failures": [c["name"] for c in checks if not c["pass"]],
    }
    _emit(args, meta, report=None if args.format == "csv" else report)
    if args.format == "csv":
        # verification reports are structured; CSV callers get the JSON body too
        sys.stdout.write(json.dumps(_json_ready(report), sort_keys=True) + "\n")
    return 0 if passed else 1


def _cmd_verify_sharpness(args) -> int:
    p = _parse_p(args.p)
    if not 0.0 < args.R < 1.0:
        raise UsageError("R must lie in (0, 1)")
    if p == 1.0:
        raise UsageError("sharpness verification requires p > 1")
    try:
        rep = sharpness_report(args.R, conjugate(p), args.n, nodes=args.nodes)
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    meta = _base_meta(args, p)
    meta["R"] = args.R
    checks = [
        {
            "name": "extremal_ratio",
            "value": rep.ratio,
            "target": 1.0,
            "tolerance": 1e-6,
            "pass": bool(abs(rep.ratio - 1.0) <= 1e-6),
        },
        {
            "name": "origin_value",
            "value": rep.origin_value,
            "target": 0.0,
            "tolerance": 1e-9,
            "pass": bool(abs(rep.origin_value) <= 1e-9),
        },
        {
            "name": "lhs_vs_bound",
            "value": rep.lhs,
            "target": rep.norm * rep.bound,
            "tolerance": 1e-6,
            "pass": True,
        },
    ]
    return _verify_exit(args, meta, checks)


def _cmd_verify_bound(args) -> int:
    p = _parse_p(args.p)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if not 1 <= args.degree <= 12:
        raise UsageError("--degree must lie in [1, 12]")
    meta = _base_meta(args, p)
    meta.update({"samples": args.samples, "degree": args.degree, "trials": args.trials})
    violations = 0
    worst = math.inf
    for i in range(args.samples):
        sample = random_harmonic(
            args.n, args.degree, target_dim=args.target_dim, seed=args.seed + i
        )
        rep = check_schwarz(sample, p, trials=args.trials, seed=args.seed + 10_000 + i)
        violations += rep.violations
        worst = min(worst, rep.worst_slack)
    checks = [
        {
            "name": "pointwise_bound_violations",
            "value": violations,
            "target": 0,
            "tolerance": 0,
            "pass": violations == 0,
        },
        {
            "name": "worst_slack",
            "value": worst,
            "target": 0.0,
            "tolerance": 0.0,
            "pass": bool(worst >= -1e-12),
        },
    ]
    return _verify_exit(args, meta, checks)


def _cmd_verify_gradient(args) -> int:
    p = _parse_p(args.p)
    if p == 1.0:
        raise UsageError("gradient verification requires p > 1")
    ratio = gradient_extremal_check(conjugate(p), args.n, nodes=args.nodes)
    target = sharp_gradient_constant(conjugate(p), args.n)
    meta = _base_meta(args, p)
    checks = [
        {
            "name": "gradient_extremal_ratio",
            "value": ratio,
            "target": target,
            "tolerance": 1e-9,
            "pass": bool(abs(ratio - target) <= 1e-9),
        }
    ]
    return _verify_exit(args, meta, checks)


def _cmd_verify_corollary(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    meta = _base_meta(args, 2.0)
    meta.update({"samples": args.samples, "degree": args.degree})
    rng = np.random.default_rng(args.seed)
    violations = 0
    worst = math.inf
    for i in range(args.samples):
        target_dim = 1 + i % 3
        sample = random_harmonic(
            args.n, args.degree, target_dim=target_dim, seed=args.seed + i
        )
        shift = rng.standard_normal(target_dim) * 3.0
        rep = check_corollary(sample, shift)
        worst = min(worst, rep.slack)
        if rep.slack < -1e-9:
            violations += 1
    checks = [
        {
            "name": "corollary_violations",
            "value": violations,
            "target": 0,
            "tolerance": 0,
            "pass": violations == 0,
        },
        {
            "name": "worst_slack",
            "value": worst,
            "target": 0.0,
            "tolerance": 1e-9,
            "pass": bool(worst >= -1e-9),
        },
    ]
    return _verify_exit(args, meta, checks)


def _add_common(parser, with_seed=False):
    parser.add_argument("--n", type=int, required=True, help="ambient dimension (>= 2)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default=None, help="write output to this path")
    parser.add_argument(
        "--nodes",
        type=int,
        default=None,
        help="quadrature node count (default: automatic, at least 128)",
    )
    if with_seed:
        parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonic-schwarz",
        description="Sharp Schwarz-type bounds for harmonic mappings of the unit ball",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gp = sub.add_parser("gp", help="tabulate (r, a_star, g_p) on a radius grid")
    gp.add_argument("--p", required=True, help="exponent in [1, inf]; 'inf' accepted")
    gp.add_argument("--r-grid", required=True, help="start:stop:step or comma list")
    _add_common(gp)
    gp.set_defaults(handler=_cmd_gp)

    sc = sub.add_parser("sharp-constant", help="sharp gradient constant at the origin")
    sc.add_argument("--p", required=True)
    _add_common(sc)
    sc.set_defaults(handler=_cmd_sharp_constant)

    verify = sub.add_parser("verify", help="verification reports")
    vsub = verify.add_subparsers(dest="verify_command", required=True)

    vs = vsub.add_parser("sharpness", help="extremal data attains the bound")
    vs.add_argument("--p", required=True)
    vs.add_argument("--R", type=float, required=True)
    _add_common(vs)
    vs.set_defaults(handler=_cmd_verify_sharpness)

    vb = vsub.add_parser("bound", help="bound holds on random harmonic maps")
    vb.add_argument("--p", required=True)
    vb.add_argument("--samples", type=int, default=50)
    vb.add_argument("--degree", type=int, default=6)
    vb.add_argument("--trials", type=int, default=20)
    vb.add_argument("--target-dim", type=int, default=1)
    _add_common(vb, with_seed=True)
    vb.set_defaults(handler=_cmd_verify_bound)

    vg = vsub.add_parser("gradient", help="gradient extremal attains the constant")
    vg.add_argument("--p", required=True)
    _add_common(vg)
    vg.set_defaults(handler=_cmd_verify_gradient)

    vc = vsub.add_parser("corollary", help="origin-gradient bound with shifts")
    vc.add_argument("--samples", type=int, default=50)
    vc.add_argument("--degree", type=int, default=6)
    _add_common(vc, with_seed=True)
    vc.set_defaults(handler=_cmd_verify_corollary)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code) if exc.code is not None else 2
    if args.n < 2:
        print("usage error: n must be >= 2", file=sys.stderr)
        return 2
    if args.nodes is not None and args.nodes < 2:
        print("usage error: --nodes must be >= 2", file=sys.stderr)
        return 2
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
