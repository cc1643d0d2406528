"""Bounded Bernstein inequality: radius/level inversion and two-sample pooling.

For n independent variables bounded in (a, b) with variance proxy sigma2,

    P(|Zbar - E Zbar| > eps) <= 2 exp(-n eps^2 / (2 (sigma2 + eps (b - a) / 3)))

``epsilon_for_alpha`` solves the right side for eps at a given level and
``alpha_for_epsilon`` evaluates it, so the two are exact inverses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import SampleStats


class DegenerateContext(ValueError):
    """Support collapses to a point (both samples identically zero)."""


@dataclass(frozen=True)
class BernsteinContext:
    n: int
    sigma2: float
    a: float
    b: float
    c_a: float = 1.0
    c_b: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if self.c_a < 1 or self.c_b < 1:
            raise ValueError("scaling constants c_a and c_b must be at least 1")
        if not self.a < self.b:
            raise DegenerateContext(f"support bounds must satisfy a < b, got a={self.a}, b={self.b}")

    @property
    def width(self) -> float:
        return self.b - self.a


def two_sample_transform(x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Pool two samples into one whose mean is mean(x) - mean(y)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    n = x.size + y.size
    return np.concatenate([(n / x.size) * x, -(n / y.size) * y])


def build_context(x_stats: SampleStats, y_stats: SampleStats, c_a: float = 1.0, c_b: float = 1.0) -> BernsteinContext:
    """Plug-in parameters for the pooled sample, using sample variances."""
    if c_a < 1 or c_b < 1:
        raise ValueError("scaling constants c_a and c_b must be at least 1")
    nx, ny = x_stats.n, y_stats.n
    n = nx + ny
    sigma2 = (n / nx) * x_stats.variance + (n / ny) * y_stats.variance
    a = -c_a * (n / ny) * y_stats.max
    b = c_b * (n / nx) * x_stats.max
    # -0.0 from an all-zero y sample reads badly in reports
    a = a + 0.0
    return BernsteinContext(n=n, sigma2=sigma2, a=a, b=b, c_a=c_a, c_b=c_b)


def bernstein_radius(n, sigma2, width, alpha):
    """Positive root of n e^2 + (2/3) w L e + 2 sigma2 L = 0 with L = log(alpha/2).

    Array-friendly; ``epsilon_for_alpha`` is the validated scalar entry point.
    """
    n = np.asarray(n, dtype=float)
    neg_log = -np.log(np.asarray(alpha, dtype=float) / 2.0)  # -L > 0
    lin = (2.0 / 3.0) * width * neg_log
    disc = lin**2 + 8.0 * n * sigma2 * neg_log
    return (lin + np.sqrt(disc)) / (2.0 * n)


def bernstein_tail(n, sigma2, width, epsilon):
    """Right side of the inequality, capped at 1."""
    epsilon = np.asarray(epsilon, dtype=float)
    with np.errstate(divide="ignore"):
        expo = -0.5 * n * epsilon**2 / (sigma2 + epsilon * width / 3.0)
    return np.minimum(1.0, 2.0 * np.exp(expo))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def epsilon_for_alpha(ctx: BernsteinContext, alpha: float) -> float:
    _check_alpha(alpha)
    return float(bernstein_radius(ctx.n, ctx.sigma2, ctx.width, alpha))


def alpha_for_epsilon(ctx: BernsteinContext, epsilon: float) -> float:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    return float(bernstein_tail(ctx.n, ctx.sigma2, ctx.width, epsilon))


def one_sample_context(stats: SampleStats, c_b: float = 1.0) -> BernsteinContext:
    # sigma2 = n Var(Xbar) = s^2; support (0, c_b max)
    if c_b < 1:
        raise ValueError("c_b must be at least 1")
    return BernsteinContext(n=stats.n, sigma2=stats.variance, a=0.0, b=c_b * stats.max, c_b=c_b)

