"""Command-line front end.

Subcommands: ``ml``, ``invariance``, ``solve``, ``verify``, ``figure``.
Exit status: 0 success, 2 invalid input, 3 verification above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .errors import FracwaveError
from .mittag import MLSpec, ml
from .solutions import (build_odibat, build_quintic, build_similarity, eval_odibat, eval_quintic,
                        eval_similarity, rosenau_hyman)
from .subspace import Basis, KOperator, check_invariance
from .verify import (NUMERIC_TOL, ResidualReport, make_grid, verify_odibat, verify_pde,
                     verify_quintic_system, verify_similarity)

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3
TOL_ENV = "FRACWAVE_TOL"

RANGE_HELP = ("a number, a comma list, or start:stop:step; start is included and stop is "
              "included when it lies on the step grid (within 1e-9 steps)")


class UsageError(Exception):
    pass


def parse_values(text: str) -> np.ndarray:
    """Parse ``start:stop:step``, ``v1,v2,...`` or a single number."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise UsageError(f"range needs start:stop:step, got {text!r}")
            start, stop, step = parts
            if not step > 0 or stop < start:
                raise UsageError(f"range needs step > 0 and stop >= start, got {text!r}")
            n = int(math.floor((stop - start) / step + 1e-9))
            return np.round(start + step * np.arange(n + 1), 12)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError as exc:
        raise UsageError(f"cannot parse numbers from {text!r}") from exc


def parse_basis(text: str) -> Basis:
    kind, _, arg = text.partition(":")
    try:
        if kind == "monomial":
            return Basis.monomial(int(arg or 3))
        if kind in ("trig", "hyperbolic"):
            omega = Fraction(arg) if arg else (Fraction(1) if kind == "trig" else Fraction(1, 2))
            return Basis.trig(omega) if kind == "trig" else Basis.hyperbolic(omega)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad basis parameter in {text!r}") from exc
    raise UsageError(f"basis must be monomial:D, trig:W or hyperbolic:W, got {text!r}")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_csv(header: Sequence[str], rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def write_json(record: dict, out) -> None:
    rec = {"schema": 1, **record}
    out.write(json.dumps(rec, sort_keys=True, indent=2))
    out.write("\n")


def _env_tol(default: float) -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return default
    try:
        val = float(raw)
    except ValueError as exc:
        raise UsageError(f"{TOL_ENV} must be a number, got {raw!r}") from exc
    if not val > 0:
        raise UsageError(f"{TOL_ENV} must be positive")
    return val


def family_rows(two_alphas, ts, mubar: float = 1.0, tol: float = 1e-12):
    """Rows ``(two_alpha, t, E_{2a,1}(-(mubar t)^{2a}))``."""
    for ta in two_alphas:
        spec = MLSpec(float(ta), 1.0, tol=tol)
        for t in ts:
            yield float(ta), float(t), ml(spec, -((abs(mubar) * t) ** ta))


def cmd_ml(args, out) -> int:
    if args.two_alpha:
        rows = list(family_rows(parse_values(args.two_alpha), parse_values(args.t), args.mubar, args.tol))
        if args.format == "json":
            write_json({"kind": "ml_family", "mubar": args.mubar,
                        "rows": [list(r) for r in rows]}, out)
        else:
            write_csv(["two_alpha", "t", "value"], rows, out)
        return EXIT_OK
    if args.z is None:
        raise UsageError("ml needs either --two-alpha with --t, or --z")
    spec = MLSpec(args.a, args.b, policy=args.policy, tol=args.tol)
    rows = [(float(z), ml(spec, z)) for z in parse_values(args.z)]
    if args.format == "json":
        write_json({"kind": "ml", "a": args.a, "b": args.b, "policy": args.policy,
                    "rows": [list(r) for r in rows]}, out)
    else:
        write_csv(["z", "value"], rows, out)
    return EXIT_OK


def _operator(args) -> KOperator:
    if args.op == "third":
        return KOperator.third_order()
    if args.op == "quintic":
        return KOperator.quintic(args.nu, args.beta, args.gamma)
    if args.op == "odibat":
        return KOperator.odibat(args.a)
    return rosenau_hyman()


def cmd_invariance(args, out) -> int:
    report = check_invariance(_operator(args), parse_basis(args.basis))
    if args.format == "json":
        write_json(report.to_record(), out)
    else:
        out.write(str(report) + "\n")
    return EXIT_OK


def cmd_solve(args, out) -> int:
    xs = parse_values(args.x)
    ts = parse_values(args.t)
    if args.solution == "similarity":
        sol = build_similarity(args.alpha)
        grid = [(t, eval_similarity(sol, xs, t)) for t in ts]
    elif args.solution == "quintic":
        sol = build_quintic(args.alpha, args.nu, args.beta, args.gamma, args.C)
        grid = [(t, eval_quintic(sol, xs, t)) for t in ts]
    else:
        sol = build_odibat(args.a, args.c, args.alpha)
        grid = [(t, eval_odibat(sol, xs, t)) for t in ts]
    rows = [(float(t), float(x), float(u)) for t, us in grid for x, u in zip(xs, np.atleast_1d(us))]
    if args.format == "json":
        write_json({"kind": args.solution, "solution": sol.to_record(),
                    "rows": [list(r) for r in rows]}, out)
    else:
        write_csv(["t", "x", "u"], rows, out)
    return EXIT_OK


def run_verify(args) -> ResidualReport:
    tol = _env_tol(args.tol if args.tol is not None else NUMERIC_TOL)
    if args.target == "similarity":
        return verify_similarity(args.alpha)
    if args.target == "quintic-system":
        return verify_quintic_system(args.alpha, args.mubar, (args.t0, args.T), args.h, levels=args.levels, tol=tol)
    if args.target == "quintic-pde":
        sol = build_quintic(args.alpha, args.nu, args.beta, args.gamma, args.C)
        grid = make_grid(args.T, args.h, args.levels)
        return verify_pde(sol, sol.operator, grid, t_min=args.t0, levels=args.levels, tol=tol)
    sol = build_odibat(args.a, args.c, args.alpha)
    return verify_odibat(sol, make_grid(args.T, args.h, args.levels), t_min=args.t0, levels=args.levels)


def cmd_verify(args, out) -> int:
    report = run_verify(args)
    if args.format == "json":
        out.write(report.to_json() + "\n")
    else:
        out.write(report.summary() + "\n")
    return EXIT_FAILED if report.passed is False else EXIT_OK


def cmd_figure(args, out) -> int:
    rows = family_rows(parse_values(args.two_alpha), parse_values(args.t), args.mubar)
    write_csv(["two_alpha", "t", "value"], rows, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracwave", description=__doc__.splitlines()[0],
                                epilog=f"Ranges: {RANGE_HELP}. {TOL_ENV} overrides the verification tolerance.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("csv", "json")):
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")
        sp.add_argument("--format", choices=formats, default=formats[0])

    sp = sub.add_parser("ml", help="tabulate Mittag-Leffler values")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--z", help=f"arguments; {RANGE_HELP}")
    sp.add_argument("--policy", default="auto")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--two-alpha", help="family E_{2a,1}(-(mubar t)^{2a}) for these 2a values")
    sp.add_argument("--t", default="0:10:0.05", help=f"times for --two-alpha; {RANGE_HELP}")
    sp.add_argument("--mubar", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_ml)

    sp = sub.add_parser("invariance", help="closure report of an operator on a basis")
    sp.add_argument("--op", choices=("third", "quintic", "odibat", "rosenau-hyman"), default="third")
    sp.add_argument("--basis", default="monomial:3", help="monomial:D, trig:W or hyperbolic:W")
    sp.add_argument("--nu", default="1")
    sp.add_argument("--beta", default="9/2")
    sp.add_argument("--gamma", default="2")
    sp.add_argument("--a", default="1")
    common(sp, ("text", "json"))
    sp.set_defaults(func=cmd_invariance)

    sp = sub.add_parser("solve", help="tabulate an exact solution u(x, t)")
    sp.add_argument("--solution", choices=("similarity", "quintic", "odibat"), required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--nu", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=4.5)
    sp.add_argument("--gamma", type=float, default=2.0)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--x", default="0:6:0.5", help=RANGE_HELP)
    sp.add_argument("--t", default="1:5:1", help=RANGE_HELP)
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="residual check of an exact solution")
    sp.add_argument("--target", choices=("similarity", "quintic-system", "quintic-pde", "odibat"), required=True)
    sp.add_argument("--alpha", type=float, default=0.75)
    sp.add_argument("--mubar", type=float, default=1.0)
    sp.add_argument("--nu", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=4.5)
    sp.add_argument("--gamma", type=float, default=2.0)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=2.0**-11)
    sp.add_argument("--t0", type=float, default=0.5)
    sp.add_argument("--T", type=float, default=5.0)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--tol", type=float, default=None)
    common(sp, ("json", "text"))
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("figure", help="CSV of E_{2a,1}(-t^{2a}) for several 2a")
    sp.add_argument("--two-alpha", default="1.0,1.5,2.0")
    sp.add_argument("--t", default="0:10:0.01", help=RANGE_HELP)
    sp.add_argument("--mubar", type=float, default=1.0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_figure)
    return p


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (UsageError, FracwaveError, ValueError, ArithmeticError) as exc:
        print(f"fracwave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
