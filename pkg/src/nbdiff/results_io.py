"""Results CSV: one row per (experiment, method), fixed column order."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from typing import Iterable, TextIO

from .inference import MethodKind
from .simulation import ExperimentResult, ExperimentSpec, MethodRecord, SUMMARY_COLUMNS

COLUMNS = (
    "mu_x", "mu_y", "theta_x", "theta_y", "n_x", "n_y", "trials", "alpha", "seed",
    "method", "coverage", "coverage_se", "mean_length", "median_length", "degenerate_trials",
)


class SchemaError(ValueError):
    pass


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def result_rows(result: ExperimentResult) -> list[list[str]]:
    s = result.spec
    rows = []
    for method, rec in result.records.items():
        rows.append([_fmt(v) for v in (
            s.mu_x, s.mu_y, s.theta_x, s.theta_y, s.n_x, s.n_y, s.trials, s.alpha, s.seed,
        )] + [method.value] + [_fmt(v) for v in (
            rec.coverage, rec.coverage_se, rec.mean_length, rec.median_length, rec.degenerate_trials,
        )])
    return rows


class ResultsWriter:
    """Streams rows to ``fh`` and flushes after each experiment."""

    def __init__(self, fh: TextIO):
        self._fh = fh
        self._writer = csv.writer(fh, lineterminator="\n")
        self._writer.writerow(COLUMNS)

    def __call__(self, result: ExperimentResult) -> None:
        self._writer.writerows(result_rows(result))
        self._fh.flush()


def write_results(path, results: Iterable[ExperimentResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = ResultsWriter(fh)
        for r in results:
            w(r)


def read_results(path) -> list[ExperimentResult]:
    """Rebuild experiment results from a results CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise SchemaError(f"{path}: header does not match results schema")
        grouped: dict[tuple, dict] = {}
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(COLUMNS):
                raise SchemaError(f"{path}:{lineno}: expected {len(COLUMNS)} fields, got {len(row)}")
            rec = dict(zip(COLUMNS, row))
            try:
                key = (float(rec["mu_x"]), float(rec["mu_y"]), float(rec["theta_x"]), float(rec["theta_y"]),
                       int(rec["n_x"]), int(rec["n_y"]), int(rec["trials"]), float(rec["alpha"]), int(rec["seed"]))
                method = MethodKind(rec["method"])
                mrec = MethodRecord(float(rec["coverage"]), float(rec["coverage_se"]),
                                    float(rec["mean_length"]), float(rec["median_length"]),
                                    int(rec["degenerate_trials"]))
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
            grouped.setdefault(key, {})[method] = mrec
    results = []
    for key, records in grouped.items():
        mu_x, mu_y, th_x, th_y, n_x, n_y, trials, alpha, seed = key
        spec = ExperimentSpec(mu_x, mu_y, th_x, th_y, n_x, n_y, trials=trials, alpha=alpha, seed=seed,
                              methods=tuple(records))
        results.append(ExperimentResult(spec, records))
    return results


def write_summary(fh: TextIO, rows: dict[str, dict[str, float]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("method",) + SUMMARY_COLUMNS)
    for name, stats in rows.items():
        w.writerow([name] + [f"{stats[c]:.4f}" for c in SUMMARY_COLUMNS])


def coverage_matrices(results: Iterable[ExperimentResult]) -> dict[tuple, dict]:
    """Group coverage by figure slice and method into (n_x, n_y) tables.

    Keys are ``(mu_x, mu_y, theta_x, theta_y, method)``; values map
    ``(n_x, n_y)`` to coverage.
    """
    out: dict[tuple, dict] = defaultdict(dict)
    for r in results:
        s = r.spec
        for method, rec in r.records.items():
            out[(s.mu_x, s.mu_y, s.theta_x, s.theta_y, method)][(s.n_x, s.n_y)] = rec.coverage
    return dict(out)


def _slug(v: float) -> str:
    return f"{v:g}"


def write_coverage_matrices(out_dir, results: Iterable[ExperimentResult]) -> list[Path]:
    """One CSV per slice and method: rows n_x, columns n_y, blank when absent."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for (mu_x, mu_y, th_x, th_y, method), cells in sorted(coverage_matrices(results).items(),
                                                          key=lambda kv: kv[0][:4] + (kv[0][4].value,)):
        nxs = sorted({k[0] for k in cells})
        nys = sorted({k[1] for k in cells})
        name = (f"coverage_{method.value}_mux{_slug(mu_x)}_muy{_slug(mu_y)}"
                f"_thx{_slug(th_x)}_thy{_slug(th_y)}.csv")
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n_x\\n_y"] + nys)
            for nx in nxs:
                w.writerow([nx] + [repr(cells[(nx, ny)]) if (nx, ny) in cells else "" for ny in nys])
        paths.append(path)
    return paths

