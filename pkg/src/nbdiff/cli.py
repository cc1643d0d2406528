"""Command-line interface: ``nbdiff analyze | simulate | report``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .concentration import DegenerateContext
from .distributions import DispersionInestimable, NegBinParams, mom_dispersion, summarize
from .gridconfig import ConfigError, bundled_config, load_config
from .inference import (
    DegenerateIntervalWarning,
    GridSpec,
    MethodKind,
    ci_bernstein_two_sample,
    ci_mixture,
    ci_normal_two_sample,
    select_method,
    test_mean_difference,
)
from .results_io import ResultsWriter, SchemaError, read_results, write_coverage_matrices, write_summary
from .simulation import run_grid, summarize_lengths, table3_grid

log = logging.getLogger("nbdiff")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

PARALLELISM_ENV = "NBDIFF_PARALLELISM"
INTERVAL_METHODS = (MethodKind.NORMAL, MethodKind.BERNSTEIN, MethodKind.MIXTURE)


class InputError(Exception):
    pass


# --- input parsing -----------------------------------------------------------

def _count(token: str, where: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise InputError(f"{where}: not an integer count: {token!r}") from None
    if value < 0:
        raise InputError(f"{where}: negative count {value}")
    return value


def read_counts(path) -> list[int]:
    """One non-negative integer per line; blank lines and ``#`` comments skipped."""
    counts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                counts.append(_count(line, f"{path}:{lineno}"))
    return counts


def read_grouped(path) -> tuple[list[int], list[int]]:
    """Two-column ``group,count`` CSV with groups ``x`` and ``y``."""
    x, y = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise InputError(f"{path}:{lineno}: expected group,count")
            group, value = row[0].strip().lower(), row[1].strip()
            if lineno == 1 and group == "group":
                continue
            if group not in ("x", "y"):
                raise InputError(f"{path}:{lineno}: group must be x or y, got {row[0]!r}")
            (x if group == "x" else y).append(_count(value, f"{path}:{lineno}"))
    return x, y


def _inline(text: str, name: str) -> list[int]:
    return [_count(t.strip(), name) for t in text.split(",") if t.strip()]


def parse_methods(text: str) -> list[MethodKind]:
    methods = []
    for token in text.split(","):
        if not token.strip():
            continue
        try:
            m = MethodKind.parse(token)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if m not in INTERVAL_METHODS:
            raise InputError(f"method {m.value!r} is not available for two-sample intervals")
        if m not in methods:
            methods.append(m)
    if not methods:
        raise InputError("no methods requested")
    return methods


# --- analyze -----------------------------------------------------------------

def _load_samples(args) -> tuple[list[int], list[int]]:
    if args.data:
        if args.x or args.y or args.x_values or args.y_values:
            raise InputError("--data cannot be combined with separate x/y inputs")
        x, y = read_grouped(args.data)
    else:
        if bool(args.x) == bool(args.x_values) or bool(args.y) == bool(args.y_values):
            raise InputError("give exactly one of --x/--x-values and one of --y/--y-values, or --data")
        x = read_counts(args.x) if args.x else _inline(args.x_values, "--x-values")
        y = read_counts(args.y) if args.y else _inline(args.y_values, "--y-values")
    if not x or not y:
        raise InputError("both samples must be non-empty")
    return x, y


def _recommend(stats) -> dict:
    try:
        theta = mom_dispersion(stats)
    except (DispersionInestimable, ValueError) as exc:
        return {"theta_mom": None, "recommended": None, "note": str(exc)}
    if stats.mean <= 0:
        return {"theta_mom": theta, "recommended": None, "note": "sample mean is zero"}
    return {"theta_mom": theta, "recommended": select_method(stats.n, stats.mean, theta).value}


def cmd_analyze(args) -> int:
    if not 0 < args.alpha < 1:
        raise InputError("--alpha must lie in (0, 1)")
    if not 0 <= args.weight <= 1:
        raise InputError("--weight must lie in [0, 1]")
    if args.c_a < 1 or args.c_b < 1:
        raise InputError("--c-a and --c-b must be at least 1")
    methods = parse_methods(args.method)
    x, y = _load_samples(args)
    xs, ys = summarize(x), summarize(y)
    if xs.n < 2 or ys.n < 2:
        raise InputError("each sample needs at least two observations")

    grid = None
    if args.variance_mode == "grid":
        if not args.kinds:
            raise InputError("--variance-mode grid requires --kinds KIND_X,KIND_Y")
        kinds = [MethodKind.parse(k) for k in args.kinds.split(",")]
        if len(kinds) != 2:
            raise InputError("--kinds takes exactly two kinds")
        try:
            px = NegBinParams(xs.mean, mom_dispersion(xs))
            py = NegBinParams(ys.mean, mom_dispersion(ys))
        except (DispersionInestimable, ValueError) as exc:
            raise InputError(f"grid mode needs dispersion estimates: {exc}") from None
        grid = GridSpec(kinds[0], kinds[1], px, py)

    degenerate = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateIntervalWarning)
        normal = ci_normal_two_sample(xs, ys, args.alpha, args.variance_mode, grid)
        bern = ci_bernstein_two_sample(xs, ys, args.alpha, args.c_a, args.c_b)
    degenerate.extend(str(w.message) for w in caught if issubclass(w.category, DegenerateIntervalWarning))
    intervals = {MethodKind.NORMAL: normal, MethodKind.BERNSTEIN: bern,
                 MethodKind.MIXTURE: ci_mixture(normal, bern, args.weight)}

    record = {
        "n_x": xs.n, "n_y": ys.n, "mean_x": xs.mean, "mean_y": ys.mean,
        "var_x": xs.variance, "var_y": ys.variance, "difference": xs.mean - ys.mean,
        "alpha": args.alpha, "variance_mode": args.variance_mode,
        "intervals": {}, "selector": {"x": _recommend(xs), "y": _recommend(ys)},
    }
    out = sys.stdout
    print(f"n_x = {xs.n}, mean_x = {xs.mean:.6g}, s2_x = {xs.variance:.6g}, max_x = {xs.max}", file=out)
    print(f"n_y = {ys.n}, mean_y = {ys.mean:.6g}, s2_y = {ys.variance:.6g}, max_y = {ys.max}", file=out)
    print(f"difference of means = {xs.mean - ys.mean:.6g}", file=out)
    level = 100 * (1 - args.alpha)
    for m in methods:
        ci = intervals[m]
        print(f"{m.value:>9} {level:g}% CI: [{ci.lower:.6g}, {ci.upper:.6g}]  length {ci.length:.6g}", file=out)
        record["intervals"][m.value] = {"lower": ci.lower, "upper": ci.upper, "length": ci.length,
                                        "level": ci.level}
    for side in ("x", "y"):
        sel = record["selector"][side]
        rec = sel["recommended"] or f"n/a ({sel.get('note', '')})"
        print(f"one-sample recommendation for {side}: {rec}", file=out)

    if args.null is not None:
        record["tests"] = {}
        for m in (MethodKind.NORMAL, MethodKind.BERNSTEIN):
            if m not in methods:
                continue
            try:
                t = test_mean_difference(xs, ys, args.null, m, args.c_a, args.c_b)
            except DegenerateContext as exc:
                degenerate.append(f"{m.value} test: {exc}")
                continue
            print(f"{m.value:>9} test of mu_x - mu_y = {args.null:g}: p-value {t.p_value:.6g}", file=out)
            record["tests"][m.value] = {"null_value": t.null_value, "statistic": t.statistic,
                                        "p_value": t.p_value}

    record["warnings"] = degenerate
    for msg in degenerate:
        print(f"warning: {msg}", file=sys.stderr)
    print(json.dumps(record, sort_keys=True), file=out)
    if args.record:
        Path(args.record).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    if degenerate and args.strict:
        return EXIT_DEGENERATE
    return EXIT_OK


# --- simulate ----------------------------------------------------------------

def default_parallelism() -> int:
    raw = os.environ.get(PARALLELISM_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{PARALLELISM_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{PARALLELISM_ENV} must be a positive integer, got {raw!r}")
    return value


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    try:
        return bundled_config(name)
    except FileNotFoundError:
        raise InputError(f"config not found: {name}") from None


def cmd_simulate(args) -> int:
    parallelism = args.parallelism or default_parallelism()
    if parallelism < 1:
        raise InputError("--parallelism must be positive")
    if args.full_grid:
        overrides = {"seed": args.seed} if args.seed is not None else {}
        grid = table3_grid(**overrides)
        warnings.warn(f"running the full grid of {len(grid)} experiments; this takes days", RuntimeWarning)
    else:
        if not args.config:
            raise InputError("a config file is required unless --full-grid is given")
        try:
            grid = load_config(_resolve_config(args.config))
        except ConfigError as exc:
            raise InputError(f"invalid config: {exc}") from None
        if args.seed is not None:
            grid = type(grid)(**{**grid.__dict__, "seed": args.seed})
    try:
        fh = open(args.output, "w", newline="")
    except OSError as exc:
        raise InputError(f"cannot write {args.output}: {exc}") from None
    with fh:
        writer = ResultsWriter(fh)
        results = run_grid(grid, parallelism=parallelism, on_result=writer)
    total_degenerate = sum(rec.degenerate_trials for r in results for rec in r.records.values())
    log.info("wrote %d experiments to %s", len(results), args.output)
    if total_degenerate:
        print(f"warning: {total_degenerate} degenerate interval(s) recorded", file=sys.stderr)
        if args.strict:
            return EXIT_DEGENERATE
    return EXIT_OK


# --- report ------------------------------------------------------------------

def cmd_report(args) -> int:
    try:
        results = read_results(args.results)
    except (OSError, SchemaError) as exc:
        raise InputError(str(exc)) from None
    if not results:
        raise InputError(f"{args.results}: no result rows")
    rows = summarize_lengths(results)
    write_summary(sys.stdout, rows)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "length_summary.csv", "w", newline="") as fh:
            write_summary(fh, rows)
        paths = write_coverage_matrices(out, results)
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


# --- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbdiff", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="intervals and tests for mu_x - mu_y from count data")
    a.add_argument("--x", help="file of x counts, one per line")
    a.add_argument("--y", help="file of y counts, one per line")
    a.add_argument("--x-values", help="comma-separated x counts")
    a.add_argument("--y-values", help="comma-separated y counts")
    a.add_argument("--data", help="CSV with group,count rows (groups x and y)")
    a.add_argument("--method", default="normal,bernstein,mixture")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--variance-mode", choices=("direct", "grid"), default="direct")
    a.add_argument("--kinds", help="grid-mode kinds for x and y, e.g. gamma,normal")
    a.add_argument("--c-a", type=float, default=1.0)
    a.add_argument("--c-b", type=float, default=1.0)
    a.add_argument("--weight", type=float, default=0.5, help="Normal weight of the mixture interval")
    a.add_argument("--null", type=float, default=None, help="test H0: mu_x - mu_y = NULL")
    a.add_argument("--record", help="also write the JSON record to this path")
    a.add_argument("--strict", action="store_true", help="exit 3 on degenerate statistics")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run a coverage simulation grid")
    s.add_argument("config", nargs="?", help="grid config path or bundled name (figure1.cfg, ...)")
    s.add_argument("-o", "--output", required=True, help="results CSV path")
    s.add_argument("-j", "--parallelism", type=int, default=None,
                   help=f"worker processes (default ${PARALLELISM_ENV} or 1)")
    s.add_argument("--seed", type=int, default=None, help="override the master seed")
    s.add_argument("--full-grid", action="store_true", help="run the full 52900-experiment grid")
    s.add_argument("--strict", action="store_true", help="exit 3 if degenerate intervals occurred")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="summarize a results CSV")
    r.add_argument("results")
    r.add_argument("--out-dir", help="directory for length_summary.csv and coverage matrices")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"nbdiff: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
