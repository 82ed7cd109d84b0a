"""Command-line front end.

    cashfit fit DATA.csv [--gaps a:b,a:b] [--diagnostics] [--oracle]
    cashfit eval DATA.csv --grid lo:hi:steps
    cashfit simulate [--config cfg.json] [--shape uniform] [--M 1,2,50] ...

Input CSV: header ``x_lo,x_hi,count``, one bin per row in ascending order,
``#`` starts a comment line. Gaps are inferred from voids between bins
unless ``--gaps`` lists them.

Exit codes: 0 success, 2 input error, 3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cash import cash_terms
from .dataset import AUTO, Bin, BinnedDataset, Gap, build_dataset
from .errors import BracketFailure, CashFitError, DatasetError, EvaluationAtSingularity, SingularDenominator
from .extended import ExtendedFit, ModelKind, fit_extended
from .oracle import grid_minimize_fallbacks, grid_minimize_nonnegative
from .sim import DEFAULT_M_GRID, Shape, results_to_csv, run_grid
from .solver import F, g, lambda_of_a

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

HEADER = ["x_lo", "x_hi", "count"]


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# I/O


def parse_gaps(text: str) -> list[Gap]:
    gaps = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            a, b = item.split(":")
            gaps.append(Gap(float(a), float(b)))
        except ValueError as exc:
            raise InputError(f"bad gap {item!r}, expected a:b") from exc
    return gaps


def read_bins(path) -> list[Bin]:
    """Parse the bin CSV. Raises InputError on malformed content."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or [c.strip() for c in rows[0]] != HEADER:
        raise InputError(f"first non-comment line must be {','.join(HEADER)}")
    bins = []
    for k, row in enumerate(rows[1:], start=1):
        if len(row) != 3:
            raise InputError(f"row {k}: expected 3 fields, got {len(row)}")
        try:
            lo, hi = float(row[0]), float(row[1])
        except ValueError as exc:
            raise InputError(f"row {k}: {exc}") from exc
        raw = row[2].strip()
        try:
            count = int(raw)
        except ValueError:
            try:
                count = float(raw)
            except ValueError as exc:
                raise InputError(f"row {k}: bad count {raw!r}") from exc
        bins.append(Bin(lo, hi, count))
    return bins


def load_dataset(path, gaps: str | None = None) -> BinnedDataset:
    return build_dataset(read_bins(path), parse_gaps(gaps) if gaps is not None else AUTO)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, ModelKind) or isinstance(obj, Shape):
        return str(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, float):
            return format(o, ".17g") if math.isfinite(o) else "null"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        return json.dumps(o)

    return enc(_clean(obj), 0)


# ---------------------------------------------------------------------------
# fit


def fit_report(ds: BinnedDataset, fit: ExtendedFit, oracle: bool = False) -> dict:
    terms = cash_terms(ds, fit.means(ds))
    report = {
        "dataset": {k: ds.summary()[k] for k in ("N", "M", "n", "R", "R_G", "R_m")},
        "kind": fit.kind,
        "params": {"a": fit.a, "lambda": fit.lam},
        "c_min": fit.c_min,
        "per_bin_c": terms,
        "alternatives": [{"kind": alt.kind, "lambda": alt.lam, "c": alt.c} for alt in fit.alternatives],
    }
    if fit.standard is not None:
        report["diagnostics"] = fit.standard.diagnostics.to_dict()
        report["standard_acceptable"] = fit.standard.acceptable
        if not fit.standard.acceptable:
            report["standard_rejection"] = {
                "reason": fit.standard.reason,
                "a": fit.standard.a,
                "lambda": fit.standard.lam,
            }
    if oracle:
        report["oracle"] = oracle_check(ds, fit)
    return report


def oracle_check(ds: BinnedDataset, fit: ExtendedFit, steps: int = 400) -> dict:
    """Grid cross-check of the reported minimum."""
    if fit.kind is ModelKind.DEGENERATE_EMPTY:
        return {"c_grid": 0.0, "delta": 0.0, "family": "empty"}
    if fit.kind is ModelKind.STANDARD:
        res = grid_minimize_nonnegative(ds, steps=steps)
        family = "all non-negative lines"
    else:
        lam_grid = [np.linspace(0.0, 3.0 * alt.lam, 20 * steps) for alt in fit.alternatives]
        res = min(grid_minimize_fallbacks(ds, *lam_grid), key=lambda r: r.c)
        family = "pivot and constant families"
    return {"c_grid": res.c, "delta": res.c - fit.c_min, "family": family}


def cmd_fit(args) -> int:
    ds = load_dataset(args.input, args.gaps)
    fit = fit_extended(ds, internal_zeros=args.diagnostics)
    print(dumps(fit_report(ds, fit, oracle=args.oracle)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        steps = int(steps)
        lo, hi = float(lo), float(hi)
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}, expected lo:hi:steps") from exc
    if steps < 1:
        raise InputError("grid needs at least one step")
    return np.linspace(lo, hi, steps)


def _cell(fn):
    try:
        v = fn()
    except (EvaluationAtSingularity, SingularDenominator, ZeroDivisionError):
        return ""
    return format(v, ".17g") if math.isfinite(v) else ""


def eval_table(ds: BinnedDataset, grid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "F", "g", "lambda"])
    for a in grid:
        a = float(a)
        w.writerow([
            format(a, ".17g"),
            _cell(lambda: F(ds, a)) if ds.M > 0 else "",
            _cell(lambda: g(ds, a)),
            _cell(lambda: lambda_of_a(ds, a)),
        ])
    return buf.getvalue()


def cmd_eval(args) -> int:
    ds = load_dataset(args.input, args.gaps)
    sys.stdout.write(eval_table(ds, parse_grid(args.grid)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"bad integer list {text!r}") from exc


def cmd_simulate(args) -> int:
    opts = {
        "shapes": ["uniform"],
        "M": list(DEFAULT_M_GRID),
        "N": 100,
        "trials": 100,
        "seed": 0,
        "x_range": [0.0, 100.0],
    }
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(cfg) - set(opts) - {"shape"}
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        if "shape" in cfg:
            cfg["shapes"] = [cfg.pop("shape")]
        if isinstance(cfg.get("M"), int):
            cfg["M"] = [cfg["M"]]
        opts.update(cfg)
    if args.shape:
        opts["shapes"] = [s.strip() for s in args.shape.split(",")]
    if args.M:
        opts["M"] = _int_list(args.M)
    for key in ("N", "trials", "seed"):
        if getattr(args, key) is not None:
            opts[key] = getattr(args, key)
    try:
        shapes = [Shape(s) for s in opts["shapes"]]
        results = run_grid(
            shapes=shapes,
            Ms=opts["M"],
            N=int(opts["N"]),
            trials=int(opts["trials"]),
            seed=int(opts["seed"]),
            x_range=tuple(opts["x_range"]),
            workers=args.workers,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.format == "csv":
        sys.stdout.write(results_to_csv(results))
    else:
        print(dumps({"results": [r.to_dict(outcomes=args.outcomes) for r in results]}))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cashfit", description="Cash-statistic linear fits to binned counts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the extended non-negative linear model")
    p.add_argument("input")
    p.add_argument("--gaps", help="explicit gaps as a:b,a:b (default: inferred)")
    p.add_argument("--diagnostics", action="store_true", help="also locate the internal zeros of F")
    p.add_argument("--oracle", action="store_true", help="cross-check C_min on a brute-force grid")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="tabulate F, g and lambda on a grid of slopes")
    p.add_argument("input")
    p.add_argument("--grid", required=True, help="lo:hi:steps")
    p.add_argument("--gaps")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="Monte Carlo acceptance fractions")
    p.add_argument("--config", help="JSON file with shapes/shape, M, N, trials, seed, x_range")
    p.add_argument("--shape", help="uniform, increasing, decreasing (comma separated)")
    p.add_argument("--M", help="comma-separated total counts")
    p.add_argument("--N", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--outcomes", action="store_true", help="include per-trial outcomes in JSON")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DatasetError) as exc:
        print(f"cashfit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BracketFailure, CashFitError, FloatingPointError) as exc:
        print(f"cashfit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
