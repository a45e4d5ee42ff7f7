"""Command-line front end.

Subcommands: constant | ratio | sharpness | majorize | martingale |
sweep | apply.  All numeric output is printed with 12 significant
digits; every command is deterministic for fixed flags.  Exit codes:
0 success, 1 input error, 2 numerical non-convergence or branch
failure, 3 a verification command found a violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import bellman, hardy, martingale
from .constants import (
    Branch,
    Params,
    alpha_star,
    c_ratio,
    conjectured_value,
    sharp_constant,
)
from .errors import (
    BranchError,
    DivergenceError,
    ExponentDomainError,
    FeasibilityError,
    GenerationError,
    NonConvergenceError,
    ParameterDomainError,
    TangencyError,
)
from .numerics import OptConfig

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3

_INPUT_ERRORS = (
    ParameterDomainError,
    FeasibilityError,
    ExponentDomainError,
    GenerationError,
    ZeroDivisionError,
    ValueError,
    OSError,
)
_NUMERIC_ERRORS = (NonConvergenceError, BranchError, TangencyError)


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _round12(x):
    """Recursively round floats to 12 significant digits; non-finite
    floats become strings so the output stays strict JSON."""
    if isinstance(x, dict):
        return {k: _round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round12(v) for v in x]
    if isinstance(x, float):
        if not math.isfinite(x):
            return repr(x)
        return float(f"{x:.12g}")
    return x


def _emit(doc: dict, stream=None) -> None:
    print(json.dumps(_round12(doc), indent=2), file=stream or sys.stdout)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _opt_config(args) -> OptConfig:
    return OptConfig(
        starts=args.starts,
        max_iter=args.max_iter,
        x_tol=args.x_tol,
        f_tol=args.f_tol,
        seed=args.seed,
    )


def _add_param_flags(sp) -> None:
    sp.add_argument("--p", type=float, required=True, help="integrability exponent, p > 1")
    sp.add_argument("--m", type=float, required=True, help="weight exponent, m > -2(p-1)/p")
    sp.add_argument(
        "--lambda", dest="lam", type=float, required=True, help="operator coefficient"
    )


def _add_opt_flags(sp) -> None:
    sp.add_argument("--starts", type=int, default=25, help="multistart count")
    sp.add_argument("--seed", type=int, default=0, help="seed for start jitter")
    sp.add_argument("--x-tol", type=float, default=1e-9, help="argument tolerance")
    sp.add_argument("--f-tol", type=float, default=1e-12, help="value tolerance")
    sp.add_argument("--max-iter", type=int, default=100, help="iteration budget")


def _constant_record(params: Params, cfg: OptConfig) -> dict:
    res = sharp_constant(params, cfg)
    doc = {
        "p": params.p,
        "m": params.m,
        "lambda": params.lam,
        "gamma": params.gamma,
        "C_pow_p": res.c_pow_p,
        "C": res.c,
        "branch": res.branch.value,
        "conjectured_value": conjectured_value(params),
    }
    if res.argmax is not None:
        doc["alpha_star"], doc["beta_star"] = res.argmax
    if res.alpha_p is not None:
        doc["alpha_p"] = res.alpha_p
    return doc


def cmd_constant(args) -> int:
    params = Params(args.p, args.m, args.lam)
    _emit(_constant_record(params, _opt_config(args)))
    return EXIT_OK


def cmd_ratio(args) -> int:
    params = Params(args.p, args.m, args.lam)
    value = c_ratio(params, args.alpha, args.beta)
    _emit(
        {
            "p": params.p,
            "m": params.m,
            "lambda": params.lam,
            "gamma": params.gamma,
            "alpha": args.alpha,
            "beta": args.beta,
            "c_ratio_pow_p": value,
            "c_ratio": value ** (1.0 / params.p),
        }
    )
    return EXIT_OK


def _probe_pairs(params: Params) -> list[tuple[float, float]]:
    """Degenerate-direction probes approaching the boundary supremum."""
    g = params.gamma
    ks = [10.0, 1e2, 1e3, 1e4, 1e5]
    return [(g - 1.0, g + 1.0 / k) for k in ks] + [(g - k, g + 1.0) for k in ks]


def cmd_sharpness(args) -> int:
    params = Params(args.p, args.m, args.lam)
    cfg = _opt_config(args)
    res = sharp_constant(params, cfg)
    doc = _constant_record(params, cfg)
    if res.argmax is not None:
        a, b = res.argmax
    elif res.branch is Branch.CLOSED_FORM_M0_L1 and params.p > 2.0:
        a, b = alpha_star(params.p), 1.0
    else:
        a = b = None
    if a is not None:
        at = hardy.ratio_extremal(params, a, b)
        h = args.x_tol**0.5
        near = []
        for da, db in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)):
            aa = a + da * max(1.0, abs(a))
            bb = b + db * max(1.0, abs(b))
            if aa < params.gamma < bb:
                near.append(hardy.ratio_extremal(params, aa, bb))
        doc["ratio_pow_p_at_argmax"] = at
        doc["ratio_pow_p_near_argmax"] = max(near) if near else None
        doc["gap"] = res.c_pow_p - at
        _emit(doc)
        if res.branch is Branch.INTERIOR_OPTIMUM and abs(doc["gap"]) > 1e-6:
            print(
                f"sharpness gap {doc['gap']:.3g} exceeds 1e-6 at the interior argmax",
                file=sys.stderr,
            )
            return EXIT_NUMERIC
        return EXIT_OK
    best = -math.inf
    best_pair = None
    for aa, bb in _probe_pairs(params):
        val = hardy.ratio_extremal(params, aa, bb)
        if val > best:
            best, best_pair = val, (aa, bb)
    doc["ratio_pow_p_best_probe"] = best
    doc["probe_alpha"], doc["probe_beta"] = best_pair
    doc["gap"] = res.c_pow_p - best
    _emit(doc)
    return EXIT_OK


def cmd_majorize(args) -> int:
    params = Params(args.p, args.m, args.lam)
    spec = bellman.build_special_fn(params, _opt_config(args))
    if args.force_c is not None:
        spec = bellman.with_constant(spec, args.force_c)
    report = bellman.check_majorization(
        spec,
        x_range=(args.x_lo, args.x_hi),
        n_points=args.points,
        tol=args.tol,
    )
    doc = {
        "p": params.p,
        "m": params.m,
        "lambda": params.lam,
        "branch": spec.branch.value,
        "C_pow_p": spec.c_pow_p,
        "slope": spec.slope,
        "anchors": list(spec.anchors) if spec.anchors else None,
        "majorization": report.to_json(),
    }
    ok = report.passed
    if spec.branch is bellman.CertBranch.MART_M0_L1 and args.force_c is None:
        conditions = bellman.check_burkholder_conditions(spec)
        doc["burkholder"] = {k: r.to_json() for k, r in conditions.items()}
        ok = ok and all(r.passed for r in conditions.values())
    _emit(doc)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_martingale(args) -> int:
    em = martingale.ExtremalMartingale(args.alpha, args.s, args.n)
    if args.fuzz:
        out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
        try:
            writer = csv.writer(out)
            writer.writerow(["seed", "ratio", "passed"])
            all_ok = True
            for seed, ratio, passed in martingale.fuzz_rows(
                args.fuzz,
                args.p,
                c=args.c,
                depth=args.depth,
                max_branch=args.max_branch,
                value_scale=args.value_scale,
                seed0=args.seed,
            ):
                writer.writerow([seed, f"{ratio:.12g}", "true" if passed else "false"])
                all_ok = all_ok and passed
        finally:
            if out is not sys.stdout:
                out.close()
        return EXIT_OK if all_ok else EXIT_VERIFY
    ratio = martingale.extremal_ratio_exact(em, args.p)
    limit = martingale.limit_ratio(em.alpha, args.p)
    _emit(
        {
            "alpha": em.alpha,
            "s": em.s,
            "n": em.n,
            "p": args.p,
            "beta": em.beta,
            "growth_exceeds_one": em.growth_exceeds_one(args.p),
            "ratio_pow_p": ratio,
            "limit_pow_p": limit,
            "gap": abs(limit - ratio),
        }
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_COLUMNS = [
    "p",
    "m",
    "lambda",
    "gamma",
    "C_pow_p",
    "C",
    "branch",
    "alpha_star",
    "beta_star",
    "conjectured",
    "boundary_value",
    "wall_ms",
    "status",
    "reason",
]


def _axis_values(spec, name: str) -> list[float]:
    axis = spec.get(name, [])
    if isinstance(axis, dict):
        lo, hi, steps = float(axis["lo"]), float(axis["hi"]), int(axis["steps"])
        if steps < 1:
            raise ValueError(f"sweep axis {name!r}: steps must be >= 1")
        if steps == 1:
            return [lo]
        return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    return [float(v) for v in axis]


def _sweep_cell(cell) -> dict:
    p, m, lam, cfg_kwargs = cell
    row = {k: None for k in _SWEEP_COLUMNS}
    row.update({"p": p, "m": m, "lambda": lam})
    t0 = time.perf_counter()
    try:
        params = Params(p, m, lam)
    except ParameterDomainError as exc:
        row.update(status="skipped", reason=str(exc))
        return row
    g = params.gamma
    row["gamma"] = g
    row["conjectured"] = conjectured_value(params)
    row["boundary_value"] = max(1.0, abs(1.0 - lam / g) ** p)
    try:
        res = sharp_constant(params, OptConfig(**cfg_kwargs))
    except _NUMERIC_ERRORS as exc:
        row.update(status="error", reason=str(exc))
        return row
    row["C_pow_p"] = res.c_pow_p
    row["C"] = res.c
    row["branch"] = res.branch.value
    if res.argmax is not None:
        row["alpha_star"], row["beta_star"] = res.argmax
    row["wall_ms"] = (time.perf_counter() - t0) * 1e3
    row["status"] = "ok"
    row["reason"] = ""
    return row


def cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        spec = json.load(fh)
    fmt = spec.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValueError(f"sweep format must be 'csv' or 'json' (got {fmt!r})")
    opt = spec.get("opt", {})
    allowed = {"starts", "max_iter", "x_tol", "f_tol", "seed"}
    bad = set(opt) - allowed
    if bad:
        raise ValueError(f"unknown opt overrides in sweep spec: {sorted(bad)}")
    cells = [
        (p, m, lam, opt)
        for p in _axis_values(spec, "p")
        for m in _axis_values(spec, "m")
        for lam in _axis_values(spec, "lambda")
    ]
    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf)
        writer.writerow(_SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[k]) for k in _SWEEP_COLUMNS])
    else:
        json.dump({"rows": [_round12(r) for r in rows]}, buf, indent=2)
        buf.write("\n")
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# apply
# ---------------------------------------------------------------------------


def _norm_entry(fn, p: float, tol: float, sampled: bool) -> dict:
    try:
        if sampled:
            value = hardy.lp_norm_sampled(fn, p)
        else:
            value = hardy.lp_norm_closed(fn, p, tol=tol)
    except DivergenceError as exc:
        return {"norm": None, "reason": str(exc)}
    return {"norm": value}


def cmd_apply(args) -> int:
    params = Params(args.p, args.m, args.lam if args.lam is not None else 0.0)
    if args.operator == "residual" and args.lam is None:
        raise ValueError("--operator residual requires --lambda")
    with (sys.stdin if args.input == "-" else open(args.input)) as fh:
        doc = json.load(fh)
    if "pieces" in doc:
        fn = hardy.PiecewisePowerFn.from_json(doc)
        if args.operator == "hm":
            image = hardy.apply_Hm_closed(fn, params)
        else:
            image = hardy.residual_closed(fn, params)
        out = {
            "operator": args.operator,
            "p": params.p,
            "m": params.m,
            "image": image.to_json(),
            "input_norm": _norm_entry(fn, params.p, args.tol, sampled=False),
            "image_norm": _norm_entry(image, params.p, args.tol, sampled=False),
        }
    elif "grid" in doc:
        fn = hardy.SampledFn.from_json(doc)
        if args.operator == "hm":
            image = hardy.apply_Hm_sampled(fn, params)
        else:
            hm = hardy.apply_Hm_sampled(fn, params)
            values = fn.values - params.lam * hm.values
            image = hardy.SampledFn(grid=fn.grid, values=values)
        out = {
            "operator": args.operator,
            "p": params.p,
            "m": params.m,
            "image": image.to_json(),
            "input_norm": _norm_entry(fn, params.p, args.tol, sampled=True),
            "image_norm": _norm_entry(image, params.p, args.tol, sampled=True),
        }
    else:
        raise ValueError("input document has neither 'pieces' nor 'grid'")
    if args.lam is not None:
        out["lambda"] = params.lam
    text = json.dumps(_round12(out), indent=2) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="hardylab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("constant", help="sharp residual norm")
    _add_param_flags(sp)
    _add_opt_flags(sp)
    sp.set_defaults(func=cmd_constant)

    sp = sub.add_parser("ratio", help="two-exponent ratio value")
    _add_param_flags(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.set_defaults(func=cmd_ratio)

    sp = sub.add_parser(
        "sharpness", help="constant vs extremal-family ratio"
    )
    _add_param_flags(sp)
    _add_opt_flags(sp)
    sp.set_defaults(func=cmd_sharpness)

    sp = sub.add_parser("majorize", help="certificate verification")
    _add_param_flags(sp)
    _add_opt_flags(sp)
    sp.add_argument("--force-c", type=float, default=None, help="override the constant")
    sp.add_argument("--x-lo", type=float, default=-100.0)
    sp.add_argument("--x-hi", type=float, default=100.0)
    sp.add_argument("--points", type=int, default=10**6)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_majorize)

    sp = sub.add_parser(
        "martingale", help="extremal ratio and tree fuzzing"
    )
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--fuzz", type=int, default=0, help="verify N random trees")
    sp.add_argument("--c", type=float, default=None, help="norm-scale constant for fuzzing")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--max-branch", type=int, default=4)
    sp.add_argument("--value-scale", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="CSV path for fuzz output")
    sp.set_defaults(func=cmd_martingale)

    sp = sub.add_parser("sweep", help="grid of constants to CSV/JSON")
    sp.add_argument("--spec", required=True, help="sweep specification JSON file")
    sp.add_argument("--out", default=None, help="output path ('-' = stdout)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("apply", help="apply the operator to a function")
    sp.add_argument("--input", required=True, help="function JSON ('-' = stdin)")
    sp.add_argument("--output", default=None, help="output path ('-' = stdout)")
    sp.add_argument("--operator", choices=("hm", "residual"), default="hm")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--m", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_apply)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"hardylab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as exc:
        print(f"hardylab: failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
