"""Exit criteria. Each test prints one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest
from scipy import stats as sps

from nbdiff.cli import main
from nbdiff.concentration import BernsteinContext, alpha_for_epsilon, epsilon_for_alpha, two_sample_transform
from nbdiff.distributions import NegBinParams, nb_logpmf, nb_moments, nb_pmf, nb_sample
from nbdiff.gridconfig import bundled_config, load_config
from nbdiff.inference import (
    MethodKind,
    ci_bernstein_two_sample,
    ci_normal_two_sample,
    normal_approx_divergence,
    test_mean_difference,
)
from nbdiff.simulation import TABLE3_MU, TABLE3_THETA, run_grid, run_one_sample_experiment

N, B, M = MethodKind.NORMAL, MethodKind.BERNSTEIN, MethodKind.MIXTURE


def test_c1_two_sample_anchor(criterion):
    grid = load_config(bundled_config("two_sample_anchor.cfg"))
    assert (grid.n_x, grid.n_y, grid.trials) == ([50], [50], 10_000)
    start = time.perf_counter()
    (res,) = run_grid(grid)
    elapsed = time.perf_counter() - start
    cov = res.records[N].coverage
    ok = criterion("C1 two-sample Normal coverage 0.9822 +/- 0.015, < 60 s",
                   abs(cov - 0.9822) <= 0.015 and elapsed < 60, f"coverage={cov:.4f}, {elapsed:.1f}s")
    assert ok


def test_c2_one_sample_anchor(criterion):
    recs = run_one_sample_experiment(5.0, 0.025, 100, trials=10_000, seed=20240601)
    cov = recs[N].coverage
    assert criterion("C2 one-sample Normal coverage 0.7802 +/- 0.02", abs(cov - 0.7802) <= 0.02,
                     f"coverage={cov:.4f}")


def test_c3_figure4_spot_check(criterion):
    grid = load_config(bundled_config("figure4_anchor.cfg"))
    assert (grid.n_x, grid.n_y, grid.trials) == ([80], [50], 10_000)
    (res,) = run_grid(grid)
    cov = res.records[N].coverage
    assert criterion("C3 Normal coverage at n_x=80, n_y=50 below 0.75", cov < 0.75, f"coverage={cov:.4f}")


@pytest.fixture(scope="module")
def figure_slices():
    results = []
    for name in ("figure1.cfg", "figure4.cfg"):
        grid = load_config(bundled_config(name))
        assert grid.trials == 2000
        results += run_grid(grid, parallelism=4)
    return results


def test_c4a_bernstein_longer_than_normal(figure_slices, criterion):
    diffs = [r.records[B].median_length - r.records[N].median_length for r in figure_slices]
    ok = len(figure_slices) >= 50 and all(d > 0 for d in diffs)
    assert criterion("C4a Bernstein median length > Normal in every experiment", ok,
                     f"{len(figure_slices)} experiments, min difference {min(diffs):.3f}")


def test_c4b_mixture_median_is_midpoint(figure_slices, criterion):
    worst = 0.0
    for r in figure_slices:
        mid = 0.5 * (r.records[B].median_length + r.records[N].median_length)
        worst = max(worst, abs(r.records[M].median_length - mid) / mid)
    assert criterion("C4b Mixture median length equals Normal/Bernstein average to 1e-12", worst <= 1e-12,
                     f"worst relative gap {worst:.3g}")


def test_c5_inversion_and_duality(criterion):
    rng = np.random.default_rng(5)
    worst_round = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 5000))
        a = -rng.uniform(0, 1000)
        ctx = BernsteinContext(n, rng.uniform(0, 1e5), a, a + rng.uniform(1e-2, 1e4))
        for alpha in (0.2, 0.1, 0.05, 0.01, 0.001):
            worst_round = max(worst_round, abs(alpha_for_epsilon(ctx, epsilon_for_alpha(ctx, alpha)) - alpha))

    worst_dual = 0.0
    for i in range(1000):
        x = rng.poisson(rng.gamma(0.05, 100, int(rng.integers(2, 80))))
        y = rng.poisson(rng.gamma(0.05, 100, int(rng.integers(2, 80))))
        if x.max() == 0 and y.max() == 0:
            continue
        alpha = (0.1, 0.05, 0.01)[i % 3]
        for method, build in ((B, ci_bernstein_two_sample), (N, ci_normal_two_sample)):
            ci = build(x, y, alpha)
            if ci.length == 0:
                continue
            for w in (ci.lower, ci.upper):
                worst_dual = max(worst_dual, abs(test_mean_difference(x, y, w, method).p_value - alpha))
    ok = worst_round <= 1e-10 and worst_dual <= 1e-10
    assert criterion("C5 alpha/epsilon round trip and test/CI duality within 1e-10", ok,
                     f"round trip {worst_round:.2g}, duality {worst_dual:.2g}")


def test_c6_transform_identity(criterion):
    rng = np.random.default_rng(6)
    worst = 0.0
    for i in range(1000):
        if i % 4 == 0:
            nx, ny = 10, 1000
        elif i % 4 == 1:
            nx, ny = 1000, 10
        else:
            nx, ny = (int(v) for v in rng.integers(1, 300, 2))
        x = rng.poisson(rng.gamma(0.025, 200, nx))
        y = rng.poisson(rng.gamma(0.05, 200, ny))
        diff = x.mean() - y.mean()
        err = abs(two_sample_transform(x, y).mean() - diff)
        scale = max(abs(diff), np.abs(x).mean() + np.abs(y).mean(), 1e-300)
        worst = max(worst, err / scale)
    assert criterion("C6 pooled mean equals difference of means to 1e-12 relative", worst <= 1e-12,
                     f"worst {worst:.2g}")


def _tail_bound(k, p):
    q = p.mu / (p.mu + p.theta)
    ratio = max(q, (p.theta + k) * q / (k + 1))
    if ratio >= 1:
        return math.inf
    return nb_pmf(k, p) * ratio / (1 - ratio)


def test_c7_distribution_correctness(criterion):
    worst_norm = 0.0
    for mu in TABLE3_MU:
        for theta in TABLE3_THETA:
            p = NegBinParams(mu, theta)
            mean, var = nb_moments(p)
            upper = int(mean + 50 * math.sqrt(var))
            while _tail_bound(upper, p) >= 1e-12:
                upper *= 2
            total = math.fsum(np.exp(nb_logpmf(np.arange(upper + 1), p)))
            worst_norm = max(worst_norm, abs(total - 1))

    worst_z = 0.0
    for i, (mu, theta) in enumerate((m, t) for m in TABLE3_MU for t in TABLE3_THETA):
        p = NegBinParams(mu, theta)
        x = nb_sample(p, 10**6, seed=700 + i).astype(float)
        nb = sps.nbinom(theta, theta / (theta + mu))
        mean, var = nb_moments(p)
        kurt = float(nb.stats(moments="k"))
        se_mean = math.sqrt(var / x.size)
        se_var = math.sqrt((kurt + 2) * var**2 / x.size)  # (mu4 - sigma^4) / n
        z = max(abs(x.mean() - mean) / se_mean, abs(x.var(ddof=1) - var) / se_var)
        worst_z = max(worst_z, z)

    worst_geo = 0.0
    for mu in (0.5, 5.0, 10.0, 37.0):
        q = mu / (1 + mu)
        for k in range(0, 400, 7):
            worst_geo = max(worst_geo, abs(nb_pmf(k, NegBinParams(mu, 1.0)) / ((1 - q) * q**k) - 1))

    ok = worst_norm <= 1e-9 and worst_z <= 3 and worst_geo <= 1e-12
    assert criterion("C7 normalization 1e-9, sampler moments within 3 SE, geometric case 1e-12", ok,
                     f"norm {worst_norm:.2g}, max z {worst_z:.2f}, geometric {worst_geo:.2g}")


def test_c8_normal_approximation_divergence(criterion):
    p = NegBinParams(5.0, 0.025)
    ks = [normal_approx_divergence(p, p, n, n, trials=10**6, seed=800) for n in (50, 100, 200, 400)]
    decreasing = all(a > b for a, b in zip(ks, ks[1:]))
    # n = 8000 gives gamma shape 200 on both sides
    big = normal_approx_divergence(p, p, 8000, 8000, trials=10**6, seed=801)
    ok = decreasing and big < 0.01
    assert criterion("C8 KS distance decreases as n doubles and is < 0.01 for shapes > 100", ok,
                     "KS " + ", ".join(f"{k:.4f}" for k in ks) + f"; shape 200: {big:.4f}")


def test_c9_parallel_determinism(criterion, tmp_path, capsys):
    cfg = bundled_config("figure1.cfg")
    a, b = tmp_path / "p1.csv", tmp_path / "p8.csv"
    assert main(["simulate", str(cfg), "-o", str(a), "-j", "1"]) == 0
    assert main(["simulate", str(cfg), "-o", str(b), "-j", "8"]) == 0
    capsys.readouterr()
    same = a.read_bytes() == b.read_bytes()
    assert criterion("C9 results CSV byte-identical at parallelism 1 and 8", same,
                     f"{len(a.read_bytes())} bytes")
