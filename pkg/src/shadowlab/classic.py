"""The Poisson and Gaussian examples of biased estimators beating unbiased ones.

Poisson: ``X ~ Poi(lam)`` and the target is ``exp(-2*lam)``.  The only unbiased
estimator is ``(-1)**X``; the MLE ``exp(-2*X)`` is biased yet far closer.

Gaussian: ``S^2`` (divisor ``n - 1``) is unbiased for the variance, ``T^2``
(divisor ``n``) is biased but has the smaller mean squared error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shadowlab.errors import DomainError

# pmf switches to log space above this x
LOG_SPACE_FROM = 20
SERIES_MAX_TERMS = 200
SERIES_TERM_TOL = 1e-16

__all__ = [
    "NormalSampleStats",
    "PoissonModel",
    "mle_estimate",
    "poisson_estimator_mse",
    "poisson_estimator_mse_series",
    "poisson_pmf",
    "s_squared",
    "t_squared",
    "unbiased_delta",
    "unbiasedness_partial_sum",
    "variance_estimator_mse",
]


def _check_count(x):
    if isinstance(x, bool) or int(x) != x or x < 0:
        raise DomainError(f"x must be a non-negative integer, got {x!r}")
    return int(x)


def _check_rate(lam):
    if not (math.isfinite(lam) and lam >= 0.0):
        raise DomainError(f"lambda must be finite and non-negative, got {lam!r}")
    return float(lam)


@dataclass(frozen=True)
class PoissonModel:
    lam: float

    def __post_init__(self):
        _check_rate(self.lam)

    @property
    def target(self) -> float:
        """The estimand ``P(X = 0)**2 = exp(-2*lam)``."""
        return math.exp(-2.0 * self.lam)

    def pmf(self, x: int) -> float:
        return poisson_pmf(x, self.lam)


def poisson_pmf(x: int, lam: float) -> float:
    x = _check_count(x)
    lam = _check_rate(lam)
    if lam == 0.0:
        return 1.0 if x == 0 else 0.0
    if x > LOG_SPACE_FROM:
        return math.exp(x * math.log(lam) - lam - math.lgamma(x + 1))
    return lam**x * math.exp(-lam) / math.factorial(x)


def unbiased_delta(x: int) -> float:
    """``(-1)**x``, the only unbiased estimator of ``exp(-2*lam)``."""
    return -1.0 if _check_count(x) % 2 else 1.0


def mle_estimate(x: int) -> float:
    # underflows to 0.0 for x > ~372; still inside the target's closure [0, 1]
    return math.exp(-2.0 * _check_count(x))


def unbiasedness_partial_sum(lam: float, n_terms: int) -> float:
    """``sum_{x < n_terms} (-1)**x * pmf(x, lam)``, which tends to ``exp(-2*lam)``."""
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    return math.fsum(unbiased_delta(x) * poisson_pmf(x, lam) for x in range(n_terms))


def _mgf_neg(lam: float, t: float) -> float:
    # E[exp(-t X)] for X ~ Poi(lam)
    return math.exp(lam * math.expm1(-t))


def poisson_estimator_mse(kind: str, lam: float) -> float:
    """Exact MSE of ``'unbiased'`` or ``'mle'`` against ``exp(-2*lam)``.

    unbiased: ``delta**2 == 1`` and ``E delta = exp(-2 lam)``, so ``1 - exp(-4 lam)``.
    mle: expand the square and use ``E exp(-tX) = exp(lam (e^-t - 1))``.
    """
    lam = _check_rate(lam)
    if kind == "unbiased":
        return -math.expm1(-4.0 * lam)
    if kind == "mle":
        target = math.exp(-2.0 * lam)
        val = _mgf_neg(lam, 4.0) - 2.0 * target * _mgf_neg(lam, 2.0) + target * target
        return max(val, 0.0)
    raise DomainError(f"unknown estimator kind {kind!r}; use 'unbiased' or 'mle'")


def poisson_estimator_mse_series(kind: str, lam: float) -> float:
    """Brute-force MSE by summing ``(estimate(x) - target)**2 * pmf(x)`` over ``x``.

    Stops at 200 terms, or once past the mode when a term drops below 1e-16.
    """
    lam = _check_rate(lam)
    estimators = {"unbiased": unbiased_delta, "mle": mle_estimate}
    if kind not in estimators:
        raise DomainError(f"unknown estimator kind {kind!r}; use 'unbiased' or 'mle'")
    est = estimators[kind]
    target = math.exp(-2.0 * lam)
    terms = []
    for x in range(SERIES_MAX_TERMS):
        term = (est(x) - target) ** 2 * poisson_pmf(x, lam)
        terms.append(term)
        if x > lam and term < SERIES_TERM_TOL:
            break
    return math.fsum(terms)


class NormalSampleStats:
    """An observed sample ``X_1..X_n`` (``n >= 2``) with its variance estimators."""

    def __init__(self, values: Sequence[float]):
        self.values = tuple(float(v) for v in values)
        if len(self.values) < 2:
            raise DomainError(f"need at least 2 observations, got {len(self.values)}")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / self.n

    def sum_sq_dev(self) -> float:
        # two-pass: mean first, then deviations
        m = self.mean
        return math.fsum((v - m) ** 2 for v in self.values)

    def __repr__(self):
        return f"NormalSampleStats(n={self.n})"


def _as_stats(s) -> NormalSampleStats:
    return s if isinstance(s, NormalSampleStats) else NormalSampleStats(s)


def s_squared(s) -> float:
    """Unbiased variance estimator, divisor ``n - 1``."""
    s = _as_stats(s)
    return s.sum_sq_dev() / (s.n - 1)


def t_squared(s) -> float:
    """Maximum-likelihood variance estimator, divisor ``n``."""
    s = _as_stats(s)
    return s.sum_sq_dev() / s.n


def variance_estimator_mse(n: int, sigma2: float):
    """Exact ``(MSE(S^2), MSE(T^2))`` for ``n`` Gaussian draws of variance ``sigma2``.

    From ``sum (X_i - Xbar)^2 / sigma2 ~ chi2(n - 1)``: ``2 sigma^4/(n-1)`` and
    ``(2n - 1) sigma^4 / n^2``.
    """
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise DomainError(f"sigma2 must be positive and finite, got {sigma2!r}")
    s4 = sigma2 * sigma2
    return 2.0 * s4 / (n - 1), (2 * n - 1) * s4 / (n * n)


def batch_variance_estimators(samples: np.ndarray):
    """Row-wise ``(S^2, T^2)`` for a ``(reps, n)`` array, two-pass."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[-1]
    if n < 2:
        raise DomainError(f"need at least 2 observations per row, got {n}")
    dev = samples - samples.mean(axis=-1, keepdims=True)
    ss = np.einsum("...i,...i->...", dev, dev)
    return ss / (n - 1), ss / n
