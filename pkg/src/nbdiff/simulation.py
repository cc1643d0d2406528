"""Monte Carlo coverage and length experiments over parameter grids."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .concentration import bernstein_radius
from .distributions import draw_nb
from .inference import MethodKind, z_quantile

log = logging.getLogger(__name__)

SIMULATED_METHODS = (MethodKind.NORMAL, MethodKind.BERNSTEIN, MethodKind.MIXTURE)

# Axes of the full study grid.
TABLE3_MU = (5.0, 10.0)
TABLE3_THETA = (0.01, 0.025, 0.05, 0.075, 0.1)
TABLE3_N = tuple(range(10, 201, 10)) + (250, 500, 1000)
TABLE3_TRIALS = 10_000

# Cap on variates held in memory per chunk; fixed so chunking is reproducible.
_CHUNK_VARIATES = 2_000_000


@dataclass(frozen=True)
class ExperimentSpec:
    mu_x: float
    mu_y: float
    theta_x: float
    theta_y: float
    n_x: int
    n_y: int
    trials: int = 2000
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[MethodKind, ...] = SIMULATED_METHODS
    mixture_weight: float = 0.5
    c_a: float = 1.0
    c_b: float = 1.0

    def __post_init__(self):
        if min(self.mu_x, self.mu_y, self.theta_x, self.theta_y) <= 0:
            raise ValueError("means and dispersions must be positive")
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("sample sizes must be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.methods:
            raise ValueError("at least one method is required")
        bad = [m for m in self.methods if m not in SIMULATED_METHODS]
        if bad:
            raise ValueError(f"methods not simulated: {[m.value for m in bad]}")
        if not 0 <= self.mixture_weight <= 1:
            raise ValueError("mixture_weight must lie in [0, 1]")
        if self.c_a < 1 or self.c_b < 1:
            raise ValueError("c_a and c_b must be at least 1")

    @property
    def true_difference(self) -> float:
        return self.mu_x - self.mu_y


@dataclass(frozen=True)
class MethodRecord:
    coverage: float
    coverage_se: float
    mean_length: float
    median_length: float
    degenerate_trials: int


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: dict[MethodKind, MethodRecord] = field(default_factory=dict)


def coverage_margin(p: float, trials: int) -> tuple[float, float]:
    """Binomial standard error of a coverage estimate and its 95% margin."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be positive")
    se = math.sqrt(p * (1.0 - p) / trials)
    return se, 1.96 * se


def _chunks(trials: int, per_trial: int) -> Iterator[int]:
    size = max(1, _CHUNK_VARIATES // per_trial)
    done = 0
    while done < trials:
        m = min(size, trials - done)
        yield m
        done += m


def simulate_intervals(spec: ExperimentSpec) -> dict[MethodKind, tuple[np.ndarray, np.ndarray]]:
    """Per-trial (lower, upper) endpoints for every simulated method.

    Trials run sequentially on one generator seeded from ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    nx, ny = spec.n_x, spec.n_y
    n = nx + ny
    z = z_quantile(spec.alpha)
    w = spec.mixture_weight
    lows = {m: [] for m in SIMULATED_METHODS}
    highs = {m: [] for m in SIMULATED_METHODS}
    for m in _chunks(spec.trials, n):
        x = draw_nb(rng, spec.mu_x, spec.theta_x, (m, nx))
        y = draw_nb(rng, spec.mu_y, spec.theta_y, (m, ny))
        xbar, ybar = x.mean(axis=1), y.mean(axis=1)
        vx, vy = x.var(axis=1, ddof=1), y.var(axis=1, ddof=1)
        center = xbar - ybar

        half_n = z * np.sqrt(vx / nx + vy / ny)
        sigma2 = (n / nx) * vx + (n / ny) * vy
        width = spec.c_b * (n / nx) * x.max(axis=1) + spec.c_a * (n / ny) * y.max(axis=1)
        half_b = bernstein_radius(n, sigma2, width, spec.alpha)

        lo_n, hi_n = center - half_n, center + half_n
        lo_b, hi_b = center - half_b, center + half_b
        lows[MethodKind.NORMAL].append(lo_n)
        highs[MethodKind.NORMAL].append(hi_n)
        lows[MethodKind.BERNSTEIN].append(lo_b)
        highs[MethodKind.BERNSTEIN].append(hi_b)
        lows[MethodKind.MIXTURE].append(w * lo_n + (1 - w) * lo_b)
        highs[MethodKind.MIXTURE].append(w * hi_n + (1 - w) * hi_b)
    return {m: (np.concatenate(lows[m]), np.concatenate(highs[m])) for m in spec.methods}


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    truth = spec.true_difference
    result = ExperimentResult(spec)
    for method, (lo, hi) in simulate_intervals(spec).items():
        length = hi - lo
        degenerate = length <= 0
        # zero-width intervals never count as covering
        covered = (lo <= truth) & (truth <= hi) & ~degenerate
        p = float(covered.mean())
        se, _ = coverage_margin(p, spec.trials)
        result.records[method] = MethodRecord(
            coverage=p,
            coverage_se=se,
            mean_length=float(length.mean()),
            median_length=float(np.median(length)),
            degenerate_trials=int(degenerate.sum()),
        )
    return result


def run_one_sample_experiment(mu: float, theta: float, n: int, trials: int, alpha: float = 0.05,
                              seed: int = 0, c_b: float = 1.0) -> dict[MethodKind, MethodRecord]:
    """Coverage of the one-sample Normal and Bernstein intervals for ``mu``."""
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and at least one trial")
    rng = np.random.default_rng(seed)
    z = z_quantile(alpha)
    halves = {MethodKind.NORMAL: [], MethodKind.BERNSTEIN: []}
    centers = []
    for m in _chunks(trials, n):
        x = draw_nb(rng, mu, theta, (m, n))
        xbar, s2 = x.mean(axis=1), x.var(axis=1, ddof=1)
        centers.append(xbar)
        halves[MethodKind.NORMAL].append(z * np.sqrt(s2 / n))
        halves[MethodKind.BERNSTEIN].append(bernstein_radius(n, s2, c_b * x.max(axis=1), alpha))
    center = np.concatenate(centers)
    out = {}
    for method, parts in halves.items():
        half = np.concatenate(parts)
        degenerate = half <= 0
        p = float(((np.abs(center - mu) <= half) & ~degenerate).mean())
        out[method] = MethodRecord(p, coverage_margin(p, trials)[0], float(2 * half.mean()),
                                   float(2 * np.median(half)), int(degenerate.sum()))
    return out


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian product of parameter axes sharing the remaining settings."""

    mu_x: Sequence[float]
    mu_y: Sequence[float]
    theta_x: Sequence[float]
    theta_y: Sequence[float]
    n_x: Sequence[int]
    n_y: Sequence[int]
    trials: int = 2000
    alpha: float = 0.05
    seed: int = 20240601
    methods: tuple[MethodKind, ...] = SIMULATED_METHODS
    mixture_weight: float = 0.5
    c_a: float = 1.0
    c_b: float = 1.0

    def axes(self) -> tuple[Sequence, ...]:
        return (self.mu_x, self.mu_y, self.theta_x, self.theta_y, self.n_x, self.n_y)

    def __len__(self) -> int:
        return math.prod(len(a) for a in self.axes())

    def specs(self) -> list[ExperimentSpec]:
        if len(self) == 0:
            raise ValueError("grid has an empty axis")
        out = []
        index_axes = [range(len(a)) for a in self.axes()]
        for coords in itertools.product(*index_axes):
            mu_x, mu_y, th_x, th_y, n_x, n_y = (a[i] for a, i in zip(self.axes(), coords))
            out.append(ExperimentSpec(
                mu_x=float(mu_x), mu_y=float(mu_y), theta_x=float(th_x), theta_y=float(th_y),
                n_x=int(n_x), n_y=int(n_y), trials=self.trials, alpha=self.alpha,
                seed=experiment_seed(self.seed, coords), methods=self.methods,
                mixture_weight=self.mixture_weight, c_a=self.c_a, c_b=self.c_b,
            ))
        return out


def table3_grid(**overrides) -> ExperimentGrid:
    settings = dict(mu_x=TABLE3_MU, mu_y=TABLE3_MU, theta_x=TABLE3_THETA, theta_y=TABLE3_THETA,
                    n_x=TABLE3_N, n_y=TABLE3_N, trials=TABLE3_TRIALS)
    settings.update(overrides)
    return ExperimentGrid(**settings)


def experiment_seed(master_seed: int, coords: Iterable[int]) -> int:
    """64-bit stream seed from the master seed and grid coordinates."""
    ss = np.random.SeedSequence(entropy=int(master_seed) & (2**64 - 1), spawn_key=tuple(int(c) for c in coords))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_grid(grid, parallelism: int = 1,
             on_result: Optional[Callable[[ExperimentResult], None]] = None) -> list[ExperimentResult]:
    """Run every experiment of ``grid`` (an ExperimentGrid or list of specs).

    Results come back in grid order whatever the degree of parallelism, and
    ``on_result`` sees each one as soon as it and all earlier ones finished.
    """
    specs = grid.specs() if isinstance(grid, ExperimentGrid) else list(grid)
    if not specs:
        raise ValueError("empty grid")
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    results = []
    if parallelism == 1 or len(specs) == 1:
        stream = map(run_experiment, specs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=min(parallelism, len(specs)))
        stream = pool.map(run_experiment, specs)
    try:
        for res in stream:
            results.append(res)
            if on_result is not None:
                on_result(res)
            log.debug("finished experiment %d/%d", len(results), len(specs))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return results


# --- length summaries --------------------------------------------------------

SUMMARY_COLUMNS = ("min", "q1", "median", "mean", "q3", "max")
DIFFERENCE_ROW = "bernstein-normal"


def five_number(values) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    return {"min": float(v.min()), "q1": float(q1), "median": float(med),
            "mean": float(v.mean()), "q3": float(q3), "max": float(v.max())}


def summarize_lengths(results: Sequence[ExperimentResult]) -> dict[str, dict[str, float]]:
    """Summary of per-experiment median lengths, one row per method.

    When both Normal and Bernstein were run, an extra row summarizes their
    per-experiment difference.
    """
    if not results:
        raise ValueError("no results to summarize")
    methods = [m for m in SIMULATED_METHODS if all(m in r.records for r in results)]
    rows = {}
    for m in methods:
        rows[m.value] = five_number([r.records[m].median_length for r in results])
    if MethodKind.NORMAL in methods and MethodKind.BERNSTEIN in methods:
        rows[DIFFERENCE_ROW] = five_number(
            [r.records[MethodKind.BERNSTEIN].median_length - r.records[MethodKind.NORMAL].median_length
             for r in results])
    return rows

