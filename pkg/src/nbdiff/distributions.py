"""Negative Binomial distribution in the (mean, dispersion) parameterization."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln


class DispersionInestimable(ValueError):
    """Raised when the method-of-moments dispersion has no positive solution."""


class DegenerateSampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NegBinParams:
    """NB(mu, theta): mean ``mu`` and dispersion ``theta``.

    Variance is ``mu + mu**2 / theta``; ``theta -> inf`` is the Poisson limit.
    """

    mu: float
    theta: float

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu!r}")
        if not (self.theta > 0):
            raise ValueError(f"theta must be positive, got {self.theta!r}")

    @property
    def r(self) -> float:
        return self.theta

    @property
    def p(self) -> float:
        """Success probability of the classical (r, p) form."""
        return self.theta / (self.theta + self.mu)


@dataclass(frozen=True)
class SampleStats:
    n: int
    mean: float
    variance: float
    max: int
    degenerate: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")


def nb_logpmf(k, params: NegBinParams):
    k = np.asarray(k)
    mu, theta = params.mu, params.theta
    # log(mu + theta) is shared by both power terms
    log_mt = math.log(mu + theta)
    return (
        gammaln(theta + k)
        - gammaln(theta)
        - gammaln(k + 1.0)
        + k * (math.log(mu) - log_mt)
        + theta * (math.log(theta) - log_mt)
    )


def nb_pmf(k: int, params: NegBinParams) -> float:
    """P(X = k), evaluated through log-gamma differences."""
    if isinstance(k, bool) or int(k) != k:
        raise ValueError(f"k must be an integer, got {k!r}")
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    return float(np.exp(nb_logpmf(int(k), params)))


def nb_moments(params: NegBinParams) -> tuple[float, float]:
    mu = params.mu
    return mu, mu + mu * mu / params.theta


def draw_nb(rng: np.random.Generator, mu: float, theta: float, size) -> np.ndarray:
    """Gamma-Poisson mixture draws from an existing generator.

    numpy's gamma sampler handles shape < 1 (theta down to 0.01 and below);
    rates that underflow to 0 simply yield zero counts.
    """
    lam = rng.gamma(theta, mu / theta, size=size)
    return rng.poisson(lam)


def nb_sample(params: NegBinParams, count: int, seed: int) -> np.ndarray:
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    rng = np.random.default_rng(seed)
    return draw_nb(rng, params.mu, params.theta, int(count))


def summarize(sample: Sequence[int]) -> SampleStats:
    """Sufficient statistics of a count sample (unbiased variance).

    A single observation gets variance 0 and ``degenerate=True``.
    """
    arr = np.asarray(sample)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    arr = arr.ravel()
    n = int(arr.size)
    mean = float(arr.mean())
    if n == 1:
        warnings.warn("single observation: variance set to 0", DegenerateSampleWarning, stacklevel=2)
        return SampleStats(n=1, mean=mean, variance=0.0, max=int(arr[0]), degenerate=True)
    variance = float(arr.var(ddof=1))
    return SampleStats(n=n, mean=mean, variance=variance, max=int(arr.max()))


def mom_dispersion(stats: SampleStats) -> float:
    """Method-of-moments dispersion: solves s^2 = xbar + xbar^2 / theta."""
    if stats.n < 2:
        raise ValueError("need at least two observations")
    excess = stats.variance - stats.mean
    if excess <= 0:
        raise DispersionInestimable(
            f"sample variance {stats.variance:g} does not exceed sample mean {stats.mean:g}"
        )
    return stats.mean**2 / excess
