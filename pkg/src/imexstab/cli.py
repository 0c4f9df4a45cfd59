"""Command-line front end.

Every output starts with a metadata header (tool version, resolved
configuration, timestamp). CSV files carry it as ``#`` comment lines; JSON
documents carry it under ``"meta"``. Only the timestamp varies between
identical runs.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import regions as R
from .problems import CATALOG, catalog_problem, convergence_study, gte_study
from .schemes import (
    MAX_ORDER,
    SchemeError,
    build_scheme,
    error_constants,
    order_condition_residual,
    tabulated_scheme,
    zero_stability,
)
from .splitting import SplittingError, certify, generalized_spectrum, largest_stable_delta, validate_splitting, wp_set
from .stepping import SteppingError, SteppingPlan, exact_start_plan, run

log = logging.getLogger("imexstab")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class ValidationError(ValueError):
    pass


# -- parsing helpers ---------------------------------------------------------

_POWER = re.compile(r"^\s*([0-9.]+)\s*\^\s*([+-]?\d+)\s*$")


def parse_number(text: str) -> float:
    """Float, or ``base^exponent`` such as ``2^-6``."""
    m = _POWER.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """Comma list, integer range ``1..5``, or power range ``2^-6..2^-13`` (inclusive)."""
    text = text.strip()
    if ".." in text:
        lo, hi = (part.strip() for part in text.split("..", 1))
        m1, m2 = _POWER.match(lo), _POWER.match(hi)
        if m1 and m2:
            if m1.group(1) != m2.group(1):
                raise ValidationError(f"power range needs a common base: {text!r}")
            base = float(m1.group(1))
            e1, e2 = int(m1.group(2)), int(m2.group(2))
            step = 1 if e2 >= e1 else -1
            return [base**e for e in range(e1, e2 + step, step)]
        if re.fullmatch(r"[+-]?\d+", lo) and re.fullmatch(r"[+-]?\d+", hi):
            i1, i2 = int(lo), int(hi)
            step = 1 if i2 >= i1 else -1
            return [float(i) for i in range(i1, i2 + step, step)]
        raise ValidationError(f"cannot parse range {text!r}")
    return [parse_number(part) for part in text.split(",") if part.strip()]


def parse_orders(text: str) -> list[int]:
    vals = parse_grid(text)
    orders = [int(v) for v in vals]
    if any(o != v for o, v in zip(orders, vals)):
        raise ValidationError(f"orders must be integers: {text!r}")
    for o in orders:
        _check_order(o)
    return orders


def read_matrix(path: str | Path) -> np.ndarray:
    """Dense matrix file: first line ``N M``, then N rows of M numbers."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise ValidationError(f"cannot read matrix file {path}: {exc}") from None
    if not lines:
        raise ValidationError(f"{path}: empty matrix file")
    try:
        n, m = (int(v) for v in lines[0].split())
        rows = [[float(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError:
        raise ValidationError(f"{path}: malformed matrix file") from None
    if len(rows) != n or any(len(row) != m for row in rows):
        raise ValidationError(f"{path}: expected {n} rows of {m} entries")
    return np.array(rows, dtype=float).reshape(n, m)


def write_matrix(path: str | Path, X) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{X.shape[0]} {X.shape[1]}\n")
        for row in X:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def _check_order(r: int) -> None:
    if not 1 <= r <= MAX_ORDER:
        raise ValidationError(f"order r must be in 1..{MAX_ORDER}, got {r}")


def _check_delta(delta: float) -> None:
    if not 0 < delta <= 1:
        raise ValidationError(f"delta must lie in (0, 1], got {delta}")


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be positive and finite, got {value}")


# -- output ------------------------------------------------------------------


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


@dataclass
class Output:
    """Everything a command produces, rendered as CSV or JSON."""

    meta: dict
    columns: list[str]
    rows: list[list]
    extra: dict | None = None  # JSON-only payload (also echoed into the CSV header)

    def csv(self) -> str:
        buf = io.StringIO()
        for key in ("tool", "version", "command", "config"):
            buf.write(f"# {key}: {json.dumps(_jsonable(self.meta[key]), sort_keys=True)}\r\n")
        if self.extra:
            buf.write(f"# result: {json.dumps(_jsonable(self.extra), sort_keys=True)}\r\n")
        buf.write(f"# timestamp: {self.meta['timestamp']}\r\n")
        writer = csv.writer(buf)
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([fmt_value(v) for v in row])
        return buf.getvalue()

    def json(self) -> str:
        doc = {"meta": self.meta}
        if self.columns:
            doc["columns"] = self.columns
            doc["rows"] = self.rows
        if self.extra:
            doc.update(self.extra)
        return _dumps(doc) + "\n"


def _meta(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    return {
        "tool": "imexstab",
        "version": __version__,
        "command": args.command,
        "config": cfg,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def _emit(args, output: Output, text_override: str | None = None) -> None:
    text = text_override if text_override is not None else (output.json() if args.format == "json" else output.csv())
    if args.out:
        Path(args.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


# -- problem resolution ------------------------------------------------------


def _resolve_problem(args):
    """Catalog problem, or a splitting read from --A/--B matrix files."""
    if args.problem and (args.A or args.B):
        raise ValidationError("give either --problem or --A/--B, not both")
    if args.problem:
        if args.problem not in CATALOG:
            raise ValidationError(f"unknown problem {args.problem!r}; choose from {', '.join(CATALOG)}")
        if args.N < 1:
            raise ValidationError("N must be at least 1")
        _check_positive("alpha", args.alpha)
        return catalog_problem(args.problem, N=args.N, alpha=args.alpha)
    if not (args.A and args.B):
        raise ValidationError("give --problem or both --A and --B")

    class _FileProblem:
        split = validate_splitting(read_matrix(args.A), read_matrix(args.B))
        exact = None
        forcing = None
        meta = {"A": args.A, "B": args.B}

    return _FileProblem()


# -- commands ----------------------------------------------------------------


def cmd_coeffs(args) -> int:
    _check_order(args.r)
    _check_delta(args.delta)
    scheme = (tabulated_scheme if args.tabulated else build_scheme)(args.r, args.delta)
    ok, a_roots = zero_stability(scheme)
    ec = error_constants(scheme)
    extra = {
        "order_condition_residual": order_condition_residual(scheme),
        "zero_stable": ok,
        "a_roots": [[z.real, z.imag] for z in a_roots],
        "error_constants": {"C_I": ec.C_I, "C_E": ec.C_E, "R_I": ec.R_I, "R_E": ec.R_E},
    }
    rows = [[j, scheme.a[j], scheme.b[j], scheme.c[j]] for j in range(scheme.s + 1)]
    _emit(args, Output(_meta(args), ["j", "a", "b", "c"], rows, extra))
    return EXIT_OK


def cmd_region(args) -> int:
    _check_order(args.r)
    _check_delta(args.delta)
    if args.n < 64:
        raise ValidationError("n must be at least 64")
    y = parse_number(args.y) if args.y not in ("-inf", "inf") else R.NEG_INF
    if not y < 0:
        raise ValidationError("y must be negative (or -inf)")
    scheme = build_scheme(args.r, args.delta)
    rows = []
    if args.source in ("exact", "both") and math.isinf(y):
        cur = R.exact_boundary(args.r, args.delta, args.n)
        rows += [[p.real, p.imag, "exact", t] for p, t in zip(cur.points, cur.params)]
    if args.source in ("locus", "both") or not math.isinf(y):
        cur = R.boundary_locus(y, scheme, args.n)
        rows += [[p.real, p.imag, "locus", t] for p, t in zip(cur.points, cur.params)]
    summary = R.region_summary(args.r, args.delta).as_dict()
    if args.g:
        if args.r < 2:
            raise ValidationError("G(delta) is defined for r >= 2")
        summary["G"] = R.g_function(args.delta, args.r, (args.g_grid, args.g_grid))
    out = Output(_meta(args), ["re", "im", "source", "theta"], rows, {"summary": summary})
    _emit(args, out)
    if args.out and args.format == "csv":
        Path(args.out).with_suffix(".summary.json").write_text(_dumps({"meta": out.meta, "summary": summary}) + "\n")
    return EXIT_OK


def cmd_wrange(args) -> int:
    _check_positive("n_angles", args.n_angles)
    prob = _resolve_problem(args)
    wr = wp_set(prob.split, args.p, args.n_angles)
    spec = generalized_spectrum(prob.split)
    rows = [[p.real, p.imag, "boundary", t] for p, t in zip(wr.points.points, wr.points.params)]
    rows += [[z.real, z.imag, "eigenvalue", None] for z in spec]
    extra = {"rightmost": wr.rightmost(), "N": prob.split.N}
    _emit(args, Output(_meta(args), ["re", "im", "kind", "theta"], rows, extra))
    return EXIT_OK


def cmd_certify(args) -> int:
    _check_order(args.r)
    _check_delta(args.delta)
    prob = _resolve_problem(args)
    verdict = certify(prob.split, args.r, args.delta, args.p, args.n_angles)
    extra = {"verdict": verdict.as_dict()}
    if args.scan_step:
        _check_positive("scan_step", args.scan_step)
        grid = np.round(np.arange(1.0, 0.0, -args.scan_step), 12)
        grid = grid[grid > 0]
        extra["largest_stable_delta"] = largest_stable_delta(prob.split, args.r, args.p, grid, args.n_angles)
    out = Output(_meta(args), [], [], extra)
    _emit(args, out, out.json())
    return EXIT_OK


def cmd_simulate(args) -> int:
    _check_order(args.r)
    _check_delta(args.delta)
    _check_positive("k", args.k)
    if args.steps < 0:
        raise ValidationError("steps must be non-negative")
    prob = _resolve_problem(args)
    scheme = build_scheme(args.r, args.delta)
    if args.init == "exact":
        if prob.exact is None:
            raise ValidationError("--init exact needs a problem with a known solution")
        t_final = args.steps * args.k
        plan = exact_start_plan(scheme, prob.split, args.k, t_final, prob.exact, prob.forcing)
    else:
        rng = np.random.default_rng(args.seed)
        N = prob.split.N
        init = [np.ones(N) if args.init == "ones" else rng.standard_normal(N) for _ in range(scheme.s)]
        plan = SteppingPlan(scheme, prob.split, args.k, args.steps, init, prob.forcing, 0.0)
    traj = run(plan, keep="last")
    rows = [[i - (scheme.s - 1), t, nrm] for i, (t, nrm) in enumerate(zip(traj.times, traj.norms))]
    _emit(args, Output(_meta(args), ["step", "t", "norm"], rows, {"diverged": traj.diverged}))
    return EXIT_OK


def _table(args, first_col: str, reports) -> Output:
    cols = [first_col]
    for rep in reports:
        cols += [f"error_r{rep.r}", f"rate_r{rep.r}"]
    rows = []
    for i in range(len(reports[0].rows)):
        row = [reports[0].rows[i][0]]
        for rep in reports:
            row += [rep.rows[i][1], rep.rows[i][2]]
        rows.append(row)
    return Output(_meta(args), cols, rows)


def cmd_convergence(args) -> int:
    orders = parse_orders(args.orders)
    _check_delta(args.delta)
    ks = parse_grid(args.k)
    for k in ks:
        _check_positive("k", k)
    prob = _resolve_problem(args)
    if prob.exact is None:
        raise ValidationError("convergence needs a problem with a known solution")
    ref = None if args.no_reference else 2 * ks[0]
    reports = [convergence_study(r, args.delta, prob, ks, args.t_final, reference_k=ref) for r in orders]
    _emit(args, _table(args, "k", reports))
    return EXIT_OK


def cmd_gte(args) -> int:
    orders = parse_orders(args.orders)
    deltas = parse_grid(args.deltas)
    for d in deltas:
        _check_delta(d)
    if (args.k is None) == (args.k_over_delta is None):
        raise ValidationError("give exactly one of --k and --k-over-delta")
    k = None if args.k is None else parse_number(args.k)
    if k is not None:
        _check_positive("k", k)
    else:
        _check_positive("k_over_delta", args.k_over_delta)
    prob = _resolve_problem(args)
    if prob.exact is None:
        raise ValidationError("gte needs a problem with a known solution")
    reports = [gte_study(r, deltas, prob, k, args.k_over_delta, args.t_final) for r in orders]
    _emit(args, _table(args, "delta", reports))
    return EXIT_OK


# -- argument parser ---------------------------------------------------------


def _common(p, problem_default=None):
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    if problem_default is not False:
        p.add_argument("--problem", default=problem_default, help=f"catalog problem: {', '.join(CATALOG)}")
        p.add_argument("--A", help="matrix file for the implicit part")
        p.add_argument("--B", help="matrix file for the explicit part")
        p.add_argument("--N", type=int, default=100, help="interior Chebyshev points (paper-vardiff)")
        p.add_argument("--alpha", type=float, default=2.5, help="splitting parameter (paper-vardiff)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imexstab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"imexstab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="coefficient table of one scheme")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta", type=parse_number, required=True)
    p.add_argument("--tabulated", action="store_true", help="use the closed-form table instead of the series build")
    _common(p, problem_default=False)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("region", help="boundary samples of the stability region")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta", type=parse_number, required=True)
    p.add_argument("--y", default="-inf", help="negative y, or -inf")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--source", choices=("exact", "locus", "both"), default="both")
    p.add_argument("--g", action="store_true", help="also compute G(delta)")
    p.add_argument("--g-grid", type=int, default=400)
    _common(p, problem_default=False)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("wrange", help="W_p boundary and generalized spectrum of a splitting")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--n-angles", type=int, default=256)
    _common(p)
    p.set_defaults(func=cmd_wrange)

    p = sub.add_parser("certify", help="unconditional-stability verdict")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta", type=parse_number, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--n-angles", type=int, default=256)
    p.add_argument("--scan-step", type=float, default=None, help="also report the largest certified delta on this grid")
    _common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="run the recursion and record state norms")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta", type=parse_number, required=True)
    p.add_argument("--k", type=parse_number, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--init", choices=("exact", "ones", "random"), default="ones")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convergence", help="error and rate table over a k grid")
    p.add_argument("--delta", type=parse_number, required=True)
    p.add_argument("--orders", default="1..5")
    p.add_argument("--k", default="2^-6..2^-13")
    p.add_argument("--t-final", type=float, default=1.0)
    p.add_argument("--no-reference", action="store_true", help="leave the first rate empty instead of using a 2k run")
    _common(p, problem_default="paper-vardiff")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("gte", help="final-time error table over a delta grid")
    p.add_argument("--orders", default="1..5")
    p.add_argument("--deltas", default="2^0..2^-6")
    p.add_argument("--k", default=None, help="fixed time step")
    p.add_argument("--k-over-delta", type=float, default=None, help="time step proportional to delta")
    p.add_argument("--t-final", type=float, default=1.0)
    _common(p, problem_default="paper-gte")
    p.set_defaults(func=cmd_gte)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ValidationError as exc:
        print(f"imexstab: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # argparse usage errors exit 2, --help/--version exit 0
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValidationError, SchemeError, SplittingError, KeyError) as exc:
        print(f"imexstab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SteppingError, np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"imexstab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"imexstab: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
