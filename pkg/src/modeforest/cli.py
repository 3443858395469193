"""Command-line entry point.

    modeforest quickshift points.csv --h 0.3 --tau 1 --out forest.json
    modeforest tree points.csv --tau 0.5
    modeforest modalreg data.csv --query-file queries.csv --h 0.3 --tau 0.5
    modeforest bench --suite all --seeds 20 --out report.json
    modeforest sample --catalog trimodal --n 1000 --seed 0 --out points.csv

Exit codes: 0 success, 2 bad input, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from ._util import InputError, InvariantError
from .cluster_tree import tree_from_forest
from .kernels import KERNELS, DensityModel, kde_self_evaluate, recommended_bandwidth
from .modal_regression import modal_regression_batch
from .quickshift import build_forest, tau_schedule
from .serialization import dumps, forest_to_dict, modal_to_dict, tree_to_dict
from .synthetic import CATALOG, catalog_entry
from . import verify

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3


def read_csv(path: str, header: bool = False, name: str = "input") -> np.ndarray:
    """Numeric CSV to an ``(n, d)`` array; errors carry the 1-based line number."""
    rows: list[list[float]] = []
    width = None
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{name}: cannot open {path}: {exc.strerror}") from None
    with fh:
        try:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if header and lineno == 1:
                    continue
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    vals = [float(c) for c in row]
                except ValueError:
                    raise InputError(f"{name}: line {lineno}: non-numeric value in {row!r}") from None
                if not all(math.isfinite(v) for v in vals):
                    raise InputError(f"{name}: line {lineno}: non-finite value")
                if width is None:
                    width = len(vals)
                elif len(vals) != width:
                    raise InputError(f"{name}: line {lineno}: expected {width} columns, got {len(vals)}")
                rows.append(vals)
        except UnicodeDecodeError:
            raise InputError(f"{name}: not valid UTF-8") from None
    if not rows:
        raise InputError(f"{name}: no data rows in {path}")
    return np.array(rows, dtype=np.float64)


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _load_points(args) -> np.ndarray:
    if args.catalog:
        if args.input:
            raise InputError("give either an input file or --catalog, not both")
        return catalog_entry(args.catalog).sample(args.n, args.seed)
    if not args.input:
        raise InputError("an input CSV or --catalog is required")
    return read_csv(args.input, args.header)


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _forest(args, x: np.ndarray):
    n, d = x.shape
    h = args.h if args.h is not None else recommended_bandwidth(n, d)
    tau = args.tau if args.tau is not None else tau_schedule(n, d)
    if args.density_file:
        dens = read_csv(args.density_file, name="density file")
        if dens.shape[1] != 1 or dens.shape[0] != n:
            raise InputError(f"density file must hold one value per sample ({n} rows, 1 column)")
        dens = dens[:, 0]
    else:
        dens = kde_self_evaluate(DensityModel(args.kernel, h, d), x)
    forest = build_forest(x, dens, tau, method=args.method)
    if args.verify:
        verify.check_forest(forest, x)
    return forest, h


def cmd_quickshift(args) -> int:
    x = _load_points(args)
    forest, h = _forest(args, x)
    _write(dumps(forest_to_dict(forest, x.shape[1], h, args.kernel)), args.out)
    return EXIT_OK


def cmd_tree(args) -> int:
    x = _load_points(args)
    forest, _ = _forest(args, x)
    tree = tree_from_forest(forest, x)
    if args.verify:
        tree.check_nesting()
    _write(dumps(tree_to_dict(tree)), args.out)
    return EXIT_OK


def cmd_modalreg(args) -> int:
    z = _load_points(args)
    if z.shape[1] < 1:
        raise InputError("data need at least one column")
    q = read_csv(args.query_file, args.query_header, name="query file")
    d = z.shape[1] - 1
    if q.shape[1] != d:
        raise InputError(f"queries have {q.shape[1]} columns, data have {d} covariates")
    n = z.shape[0]
    h = args.h if args.h is not None else recommended_bandwidth(n, z.shape[1])
    tau = args.tau if args.tau is not None else tau_schedule(n, 1)
    results = modal_regression_batch(z, DensityModel(args.kernel, h, z.shape[1]), tau, q, method=args.method)
    _write(dumps(modal_to_dict(results)), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .experiments import SUITES, run_suite

    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    if args.seeds < 1:
        raise InputError("--seeds must be at least 1")
    results = run_suite(args.suite, args.seeds, progress=lambda line: print(line, file=sys.stderr, flush=True))
    report = {
        "suite": args.suite,
        "seeds": args.seeds,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
    _write(json.dumps(report, indent=2, default=str) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    x = catalog_entry(args.catalog).sample(args.n, args.seed)
    lines = [",".join(repr(float(v)) for v in row) for row in x]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="CSV file of n rows by d numeric columns")
    p.add_argument("--header", action="store_true", help="skip the first line of the CSV")
    p.add_argument("--catalog", choices=sorted(CATALOG), help="draw the input from a catalog density instead")
    p.add_argument("--n", type=int, default=1000, help="sample size with --catalog (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="seed with --catalog (default 0)")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--h", type=_positive, help="bandwidth (default n^(-1/(4+d)))")
    p.add_argument("--tau", type=_positive, help="segmentation radius, 'inf' allowed (default from sample size)")
    p.add_argument("--kernel", default="gaussian", choices=sorted(KERNELS))
    p.add_argument("--method", default="auto", choices=["auto", "brute", "kdtree"], help="neighbour search")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modeforest", description="Quick Shift mode seeking and cluster trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quickshift", help="build the Quick Shift forest and emit it as JSON")
    _add_input(p)
    _add_model(p)
    p.add_argument("--density-file", help="one density value per sample, used instead of the KDE")
    p.add_argument("--verify", action="store_true", help="check the forest against the brute-force oracle")
    p.set_defaults(func=cmd_quickshift)

    p = sub.add_parser("tree", help="build the cluster tree and emit its levels as JSON")
    _add_input(p)
    _add_model(p)
    p.add_argument("--density-file", help="one density value per sample, used instead of the KDE")
    p.add_argument("--verify", action="store_true", help="check the forest and level nesting")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("modalreg", help="conditional modes of the last column given the others")
    _add_input(p)
    _add_model(p)
    p.add_argument("--query-file", required=True, help="CSV of query covariates, one row per query")
    p.add_argument("--query-header", action="store_true", help="skip the first line of the query CSV")
    p.set_defaults(func=cmd_modalreg)

    p = sub.add_parser("bench", help="run the acceptance experiments")
    p.add_argument("--suite", default="all")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", help="report path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sample", help="write a catalog sample as CSV")
    p.add_argument("--catalog", required=True, choices=sorted(CATALOG))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
