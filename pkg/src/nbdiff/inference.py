"""Intervals and tests for mu_x - mu_y (and a one-sample mean).

Three interval methods are offered for the two-sample problem: a Normal
approximation, the pooled Bernstein bound, and their endpoint mixture.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats as sps

from .concentration import (
    DegenerateContext,
    alpha_for_epsilon,
    build_context,
    epsilon_for_alpha,
    one_sample_context,
)
from .distributions import NegBinParams, SampleStats, summarize


class MethodKind(enum.Enum):
    NORMAL = "normal"
    GAMMA = "gamma"
    CHI_SQUARE = "chisquare"
    BERNSTEIN = "bernstein"
    MIXTURE = "mixture"
    # label only; no estimator is provided
    BOOTSTRAP = "bootstrap"

    @classmethod
    def parse(cls, name: str) -> "MethodKind":
        key = name.strip().lower().replace("_", "").replace("-", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown method {name!r}")


PARAMETRIC_KINDS = (MethodKind.NORMAL, MethodKind.GAMMA, MethodKind.CHI_SQUARE)


class DegenerateIntervalWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntervalEstimate:
    lower: float
    upper: float
    level: float
    method: MethodKind

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower endpoint exceeds upper endpoint")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class TestResult:
    null_value: float
    statistic: float
    p_value: float
    method: MethodKind

    def rejects(self, alpha: float) -> bool:
        return self.p_value < alpha


TestResult.__test__ = False  # keep pytest from collecting it


@dataclass(frozen=True)
class VarianceGridCell:
    kind_x: MethodKind
    kind_y: MethodKind
    variance: float

    def __post_init__(self):
        if self.kind_x not in PARAMETRIC_KINDS or self.kind_y not in PARAMETRIC_KINDS:
            raise ValueError("grid cells exist only for Normal, Gamma and ChiSquare")


def z_quantile(alpha: float) -> float:
    """Two-sided standard normal critical value z_{1 - alpha/2}."""
    return float(sps.norm.isf(alpha / 2.0))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


# --- variance grid -----------------------------------------------------------

def _term(kind: MethodKind, params: NegBinParams, n: int, sigma2: Optional[float]) -> float:
    mu, theta = params.mu, params.theta
    if kind is MethodKind.NORMAL:
        if sigma2 is not None:
            return sigma2 / n
        return mu * (mu + theta) / (n * theta)
    if kind is MethodKind.GAMMA:
        return mu * mu / (n * theta)
    if kind is MethodKind.CHI_SQUARE:
        return 2.0 * mu
    raise ValueError(f"{kind.name} has no parametric variance cell")


def variance_of_difference(
    kind_x: MethodKind,
    kind_y: MethodKind,
    params_x: NegBinParams,
    n_x: int,
    params_y: NegBinParams,
    n_y: int,
    sigma2_x: Optional[float] = None,
    sigma2_y: Optional[float] = None,
) -> float:
    """Variance of Xbar - Ybar in the Normal approximation for a pair of kinds.

    A Normal side contributes ``sigma2 / n`` (``sigma2`` defaults to the NB
    variance), a Gamma side ``mu^2 / (n theta)``, a ChiSquare side ``2 mu``.
    """
    if n_x < 1 or n_y < 1:
        raise ValueError("sample sizes must be positive")
    return _term(kind_x, params_x, n_x, sigma2_x) + _term(kind_y, params_y, n_y, sigma2_y)


def grid_cell(kind_x, kind_y, params_x, n_x, params_y, n_y, sigma2_x=None, sigma2_y=None) -> VarianceGridCell:
    v = variance_of_difference(kind_x, kind_y, params_x, n_x, params_y, n_y, sigma2_x, sigma2_y)
    return VarianceGridCell(kind_x, kind_y, v)


def gamma_approx_params(mu: float, theta: float, n: int) -> tuple[float, float]:
    """(shape, rate) of the Gamma approximation to a sample mean."""
    if mu <= 0 or theta <= 0 or n <= 0:
        raise ValueError("mu, theta and n must be positive")
    shape = n * theta
    return shape, shape / mu


# --- method selection --------------------------------------------------------

@dataclass(frozen=True)
class SelectorThresholds:
    n_large: int = 100
    theta_large: float = 0.1
    chi_square_tolerance: float = 0.1

    def __post_init__(self):
        if self.n_large < 1 or self.theta_large <= 0 or self.chi_square_tolerance < 0:
            raise ValueError("invalid selector thresholds")


def select_method(n: int, mu: float, theta: float, thresholds: SelectorThresholds = SelectorThresholds()) -> MethodKind:
    """Recommend a one-sample method from sample size and dispersion.

    The ``small n, large theta`` case admits several methods; Normal is
    returned there.
    """
    if n < 1 or mu <= 0 or theta <= 0:
        raise ValueError("n, mu and theta must be positive")
    if abs(mu - 2 * n * theta) / mu <= thresholds.chi_square_tolerance:
        return MethodKind.CHI_SQUARE
    large_n = n >= thresholds.n_large
    large_theta = theta >= thresholds.theta_large
    if large_theta:
        return MethodKind.NORMAL
    return MethodKind.GAMMA if large_n else MethodKind.BERNSTEIN


# --- intervals ---------------------------------------------------------------

def _as_stats(data) -> SampleStats:
    return data if isinstance(data, SampleStats) else summarize(data)


@dataclass(frozen=True)
class GridSpec:
    """Inputs for ``variance_mode='grid'``: kinds and population parameters."""

    kind_x: MethodKind
    kind_y: MethodKind
    params_x: NegBinParams
    params_y: NegBinParams
    sigma2_x: Optional[float] = None
    sigma2_y: Optional[float] = None


def ci_normal_two_sample(x_stats, y_stats, alpha: float = 0.05, variance_mode: str = "direct",
                         grid: Optional[GridSpec] = None) -> IntervalEstimate:
    _check_alpha(alpha)
    xs, ys = _as_stats(x_stats), _as_stats(y_stats)
    if xs.n < 2 or ys.n < 2:
        raise ValueError("each sample needs at least two observations")
    if variance_mode == "direct":
        v = xs.variance / xs.n + ys.variance / ys.n
    elif variance_mode == "grid":
        if grid is None:
            raise ValueError("grid mode requires a GridSpec")
        v = variance_of_difference(grid.kind_x, grid.kind_y, grid.params_x, xs.n,
                                   grid.params_y, ys.n, grid.sigma2_x, grid.sigma2_y)
    else:
        raise ValueError(f"unknown variance_mode {variance_mode!r}")
    center = xs.mean - ys.mean
    if v == 0:
        warnings.warn("both samples are constant: zero-width Normal interval", DegenerateIntervalWarning, stacklevel=2)
    half = z_quantile(alpha) * math.sqrt(v)
    return IntervalEstimate(center - half, center + half, 1 - alpha, MethodKind.NORMAL)


def ci_bernstein_two_sample(x, y, alpha: float = 0.05, c_a: float = 1.0, c_b: float = 1.0) -> IntervalEstimate:
    """Xbar - Ybar +/- eps from the pooled Bernstein bound.

    Accepts raw samples or ``SampleStats``. If both samples are all zero the
    bound is vacuous; a zero-width interval at 0 is returned with a warning.
    """
    _check_alpha(alpha)
    xs, ys = _as_stats(x), _as_stats(y)
    center = xs.mean - ys.mean
    try:
        ctx = build_context(xs, ys, c_a, c_b)
    except DegenerateContext:
        warnings.warn("both samples are identically zero: zero-width Bernstein interval",
                      DegenerateIntervalWarning, stacklevel=2)
        return IntervalEstimate(center, center, 1 - alpha, MethodKind.BERNSTEIN)
    eps = epsilon_for_alpha(ctx, alpha)
    return IntervalEstimate(center - eps, center + eps, 1 - alpha, MethodKind.BERNSTEIN)


def ci_mixture(normal_ci: IntervalEstimate, bernstein_ci: IntervalEstimate, w: float = 0.5) -> IntervalEstimate:
    if not 0.0 <= w <= 1.0:
        raise ValueError("mixture weight must lie in [0, 1]")
    if not math.isclose(normal_ci.level, bernstein_ci.level, rel_tol=0, abs_tol=1e-12):
        raise ValueError("intervals have different confidence levels")
    lo = w * normal_ci.lower + (1 - w) * bernstein_ci.lower
    hi = w * normal_ci.upper + (1 - w) * bernstein_ci.upper
    return IntervalEstimate(lo, hi, normal_ci.level, MethodKind.MIXTURE)


def ci_normal_one_sample(stats, alpha: float = 0.05) -> IntervalEstimate:
    _check_alpha(alpha)
    st = _as_stats(stats)
    if st.n < 2:
        raise ValueError("need at least two observations")
    if st.variance == 0:
        warnings.warn("constant sample: zero-width Normal interval", DegenerateIntervalWarning, stacklevel=2)
    half = z_quantile(alpha) * math.sqrt(st.variance / st.n)
    return IntervalEstimate(st.mean - half, st.mean + half, 1 - alpha, MethodKind.NORMAL)


def ci_bernstein_one_sample(sample, alpha: float = 0.05, c_b: float = 1.0) -> IntervalEstimate:
    _check_alpha(alpha)
    st = _as_stats(sample)
    ctx = one_sample_context(st, c_b)
    eps = epsilon_for_alpha(ctx, alpha)
    return IntervalEstimate(st.mean - eps, st.mean + eps, 1 - alpha, MethodKind.BERNSTEIN)


# --- tests -------------------------------------------------------------------

def test_mean_difference(x, y, null_value: float = 0.0, method: MethodKind = MethodKind.BERNSTEIN,
                         c_a: float = 1.0, c_b: float = 1.0) -> TestResult:
    """Two-sided test of H0: mu_x - mu_y = null_value."""
    xs, ys = _as_stats(x), _as_stats(y)
    stat = xs.mean - ys.mean - null_value
    if method is MethodKind.BERNSTEIN:
        if stat == 0:
            p = 1.0
        else:
            ctx = build_context(xs, ys, c_a, c_b)
            p = alpha_for_epsilon(ctx, abs(stat))
    elif method is MethodKind.NORMAL:
        if xs.n < 2 or ys.n < 2:
            raise ValueError("each sample needs at least two observations")
        v = xs.variance / xs.n + ys.variance / ys.n
        if stat == 0:
            p = 1.0
        elif v == 0:
            raise DegenerateContext("zero estimated variance with a nonzero difference")
        else:
            p = float(2.0 * sps.norm.sf(abs(stat) / math.sqrt(v)))
    else:
        raise ValueError(f"no test available for method {method.name}")
    return TestResult(null_value, stat, p, method)


test_mean_difference.__test__ = False


# --- Normal approximation diagnostics ----------------------------------------

def normal_approx_divergence(params_x: NegBinParams, params_y: NegBinParams, n_x: int, n_y: int,
                             trials: int = 100_000, seed: int = 0) -> float:
    """KS distance between a Gamma difference and its Normal approximation.

    Draws Gamma(n_x theta_x, rate n_x theta_x / mu_x) minus the matching
    Gamma for y and compares with N(mu_x - mu_y, mu_x^2/(n_x theta_x) +
    mu_y^2/(n_y theta_y)), the second-order cumulant truncation.
    """
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    kx, rx = gamma_approx_params(params_x.mu, params_x.theta, n_x)
    ky, ry = gamma_approx_params(params_y.mu, params_y.theta, n_y)
    rng = np.random.default_rng(seed)
    diff = rng.gamma(kx, 1.0 / rx, trials) - rng.gamma(ky, 1.0 / ry, trials)
    mean = params_x.mu - params_y.mu
    sd = math.sqrt(kx / rx**2 + ky / ry**2)
    return float(sps.kstest(diff, sps.norm(loc=mean, scale=sd).cdf).statistic)

