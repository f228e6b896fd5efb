"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 optimizer did not converge.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analytic
from .documents import (
    DocumentError,
    dumps_csv,
    dumps_json,
    load_profile,
    piecewise_document,
    sampled_document,
)
from .functional import EvalScheme, Zt2Parameter, delta_t_max, eval_piecewise, eval_sampled
from .optimizer import InitMode, OptimizerOptions, projected_gradient_ascent
from .profile import PiecewiseProfile, ProfileError, SeebeckBounds, cell_midpoints
from .verification import run_checks

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

SWEEP_HEADER = ("ratio", "f_numeric", "f_analytic", "abs_err", "iterations", "converged")


class UsageError(Exception):
    pass


def _bounds(s0, s1) -> SeebeckBounds:
    try:
        return SeebeckBounds(s0, s1)
    except ProfileError as exc:
        raise UsageError(f"invalid bounds: {exc}") from None


def _options(args, n_cells=None, seed=None) -> OptimizerOptions:
    try:
        return OptimizerOptions(
            n_cells=args.n if n_cells is None else n_cells,
            max_iters=args.max_iters,
            grad_tol=args.tol,
            seed=args.seed if seed is None else seed,
            init_mode=InitMode(args.init),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(text: str, path=None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _key_value_csv(summary: dict) -> str:
    return dumps_csv(("quantity", "value"), summary.items())


def cmd_optimal(args) -> int:
    bounds = _bounds(args.s0, args.s1)
    try:
        zt2 = Zt2Parameter(args.zt2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 0:
        raise UsageError(f"--n must be >= 0, got {args.n}")

    pw = analytic.optimal_profile(bounds)
    q = analytic.optimal_q(bounds)
    p = analytic.ThreeSegmentParams.from_q(q, bounds)
    fmax = analytic.f_max(bounds)
    summary = {
        "s0": bounds.s_lo,
        "s1": bounds.s_hi,
        "q": q,
        "x0": p.x0,
        "x1": p.x1,
        "f_max": fmax,
        "delta_t_max": delta_t_max(fmax, zt2),
    }
    xs = cell_midpoints(args.n) if args.n > 0 else np.empty(0)
    ys = pw(xs) if args.n > 0 else np.empty(0)

    if args.out:
        _write(dumps_json(piecewise_document(pw, bounds)), args.out)
    if args.format == "json":
        doc = dict(summary, profile=piecewise_document(pw, bounds))
        if args.n > 0:
            doc["samples"] = {"x": xs.tolist(), "S": ys.tolist()}
        _write(dumps_json(doc))
    else:
        text = _key_value_csv(summary)
        if args.n > 0:
            text += "\n" + dumps_csv(("x", "S"), zip(xs, ys))
        _write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        profile = load_profile(args.profile)
    except DocumentError as exc:
        raise UsageError(f"{args.profile}: {exc}") from None
    if isinstance(profile, PiecewiseProfile):
        fv, scheme = eval_piecewise(profile), "analytic"
    else:
        fv, scheme = eval_sampled(profile, EvalScheme(args.scheme)), args.scheme
    out = {"scheme": scheme, **fv.as_dict()}
    _write(dumps_json(out) if args.format == "json" else _key_value_csv(out))
    return EXIT_OK


def cmd_optimize(args) -> int:
    bounds = _bounds(args.s0, args.s1)
    res = projected_gradient_ascent(bounds, _options(args))
    out = {
        "s0": bounds.s_lo,
        "s1": bounds.s_hi,
        "n": res.profile.n_cells,
        "f_value": res.f_value,
        "f_max": analytic.f_max(bounds),
        "iterations": res.iterations,
        "projected_grad_norm": res.projected_grad_norm,
        "converged": res.converged,
    }
    if args.out:
        _write(dumps_json(sampled_document(res.profile, bounds)), args.out)
    if args.format == "json":
        _write(dumps_json(dict(out, kkt=res.kkt.as_dict())))
    else:
        kkt = {f"kkt_{k}": v for k, v in res.kkt.as_dict().items()}
        _write(_key_value_csv(dict(out, **kkt)))
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _sweep_row(task):
    ratio, s0, opts = task
    bounds = SeebeckBounds(s0, s0 * ratio)
    res = projected_gradient_ascent(bounds, opts)
    f_an = analytic.f_max(bounds)
    return (ratio, res.f_value, f_an, abs(res.f_value - f_an), res.iterations, res.converged)


def _parse_ratios(text: str) -> list[float]:
    try:
        ratios = [float(r) for r in text.split(",") if r.strip()]
    except ValueError:
        raise UsageError(f"--ratios must be comma-separated numbers, got {text!r}") from None
    if not ratios:
        raise UsageError("--ratios is empty")
    for r in ratios:
        if not (math.isfinite(r) and r >= 1):
            raise UsageError(f"every ratio must be >= 1, got {r}")
    return ratios


def cmd_sweep(args) -> int:
    ratios = _parse_ratios(args.ratios)
    _bounds(args.s0, args.s0)
    if args.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
    tasks = [(r, args.s0, _options(args, seed=args.seed + i)) for i, r in enumerate(ratios)]
    if args.out:
        # fail before the work, not after
        _write("", args.out)

    if args.jobs == 1:
        rows = [_sweep_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))

    _write(dumps_csv(SWEEP_HEADER, rows), args.out)
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_NOT_CONVERGED


def cmd_verify(args) -> int:
    bounds = _bounds(args.s0, args.s1)
    if not (math.isfinite(args.tol) and args.tol >= 0):
        raise UsageError(f"--tol must be >= 0, got {args.tol}")
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    checks = run_checks(bounds, n=args.n, tol=args.tol, seed=args.seed)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seebeckopt",
        description="Optimal graded Seebeck profiles for maximum thermoelectric cooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def bounds_args(p, s1=True):
        p.add_argument("--s0", type=float, required=True, help="lower Seebeck bound")
        if s1:
            p.add_argument("--s1", type=float, required=True, help="upper Seebeck bound")

    def solver_args(p):
        p.add_argument("--n", type=int, default=2000, help="number of cells (default 2000)")
        p.add_argument("--tol", type=float, default=1e-8, help="projected-gradient tolerance")
        p.add_argument("--max-iters", type=int, default=50000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--init", choices=[m.value for m in InitMode], default="mid")

    def fmt_arg(p):
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("optimal", help="closed-form optimum")
    bounds_args(p)
    p.add_argument("--zt2", type=float, default=1.0)
    p.add_argument("--n", type=int, default=0, help="also emit N sampled (x, S) pairs")
    p.add_argument("--out", help="write the piecewise profile document here")
    fmt_arg(p)
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("eval", help="evaluate F for a profile document")
    p.add_argument("profile")
    p.add_argument("--scheme", choices=[s.value for s in EvalScheme], default="exact")
    fmt_arg(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="projected gradient ascent")
    bounds_args(p)
    solver_args(p)
    p.add_argument("--out", help="write the optimized sampled profile document here")
    fmt_arg(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="optimizer vs closed form over bound ratios")
    bounds_args(p, s1=False)
    p.add_argument("--ratios", required=True, help="comma-separated s1/s0 values, each >= 1")
    solver_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: standard output)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the optimality self-checks")
    bounds_args(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-8, help="limit for round-off-level checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"seebeckopt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
