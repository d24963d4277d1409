"""Seeded Monte Carlo engine for the shadow experiment.

Work is split into fixed chunks of ``CHUNK_SIZE`` draws.  Chunk ``j`` of a
stream always gets the same sub-generator and partial results are reduced in
chunk order, so output is bit-identical whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from shadowlab.angular import AngularLaw, cdf, theta_from_uniform
from shadowlab.classic import batch_variance_estimators, variance_estimator_mse
from shadowlab.errors import ConfigurationError, DomainError, SimulationError
from shadowlab.estimators import shadow_mse
from shadowlab.geometry import (
    TWO_PI,
    PlanePoint,
    cast_shadow_batch,
    sample_uniform_disk_batch,
)

CHUNK_SIZE = 2**16
MIN_SAMPLES = 100
# degenerate darts tolerated per 10**6 draws
DEGENERATE_BUDGET = 10
MIN_EXPECTED_COUNT = 5.0
# 99.9% quantile of chi-square with 35 degrees of freedom (scipy.stats.chi2.ppf)
CHI2_CRITICAL_999_DOF35 = 66.61882884370104

_CHUNK_TAG = 0
_CHILD_TAG = 1
_UINT64_MAX = 2**64 - 1

__all__ = [
    "CHI2_CRITICAL_999_DOF35",
    "CHUNK_SIZE",
    "GofReport",
    "MeanShadow",
    "RandomStream",
    "RiskEstimate",
    "chi_square_gof",
    "estimate_mean_shadow",
    "estimate_shadow_risk",
    "risk_curve",
    "simulate_shadows",
    "simulate_variance_estimators",
]


@dataclass(frozen=True)
class RandomStream:
    """A reproducible random stream named by ``(seed, stream_id)``.

    Sub-streams for chunks and child experiments are derived through numpy's
    ``SeedSequence`` spawn keys, so distinct ids give independent PCG64 streams.
    """

    seed: int = 0
    stream_id: int = 0
    path: tuple = ()

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or not 0 <= v <= _UINT64_MAX:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def _generator(self, *key) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *self.path, *key))
        return np.random.Generator(np.random.PCG64(ss))

    def generator(self) -> np.random.Generator:
        return self._generator()

    def chunk_generator(self, index: int) -> np.random.Generator:
        return self._generator(_CHUNK_TAG, index)

    def child(self, index: int) -> RandomStream:
        return RandomStream(self.seed, self.stream_id, (*self.path, _CHILD_TAG, index))


@dataclass(frozen=True)
class RiskEstimate:
    mean: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class MeanShadow:
    mean: PlanePoint
    std_error: tuple
    n_samples: int


@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    bins: int
    n_samples: int
    observed: tuple = field(default=(), repr=False)
    expected: tuple = field(default=(), repr=False)

    def passes(self, critical: float = CHI2_CRITICAL_999_DOF35) -> bool:
        return self.statistic < critical


# -- chunked execution -------------------------------------------------------


def _chunk_sizes(n: int) -> list:
    full, rest = divmod(n, CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def _map_chunks(fn: Callable, n: int, rng: RandomStream, workers: int = 1) -> list:
    """Apply ``fn(generator, size)`` to every chunk; results come back in chunk order."""
    jobs = [(rng.chunk_generator(j), size) for j, size in enumerate(_chunk_sizes(n))]
    if workers is None or workers <= 1 or len(jobs) == 1:
        return [fn(g, s) for g, s in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


class _Moments:
    """Count, mean and centred sum of squares; merged pairwise (Chan et al.)."""

    def __init__(self, n, mean, m2):
        self.n, self.mean, self.m2 = n, mean, m2

    @classmethod
    def of(cls, values: np.ndarray) -> _Moments:
        mean = values.mean(axis=0)
        dev = values - mean
        return cls(values.shape[0], mean, (dev * dev).sum(axis=0))

    def merge(self, other: _Moments) -> _Moments:
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.n * other.n / n)
        return _Moments(n, mean, m2)

    def std_error(self):
        return np.sqrt(self.m2 / (self.n - 1) / self.n)


def _reduce(parts: Sequence[_Moments]) -> _Moments:
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.merge(p)
    return acc


def _check_n(n: int, minimum: int = MIN_SAMPLES):
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise ConfigurationError(f"need at least {minimum} samples, got {n!r}")


def _check_source(mu: PlanePoint):
    if not mu.in_disk():
        raise DomainError(f"source ({mu.x}, {mu.y}) lies outside the unit disk")


# -- shadow simulation -------------------------------------------------------


def _shadow_chunk(gen: np.random.Generator, size: int, mu: PlanePoint):
    ux, uy = sample_uniform_disk_batch(gen, size)
    theta, bad = cast_shadow_batch(mu.x, mu.y, ux, uy)
    n_degenerate = 0
    while bad.any():
        k = int(bad.sum())
        n_degenerate += k
        if n_degenerate > size:
            break
        rx, ry = sample_uniform_disk_batch(gen, k)
        theta[bad], bad_again = cast_shadow_batch(mu.x, mu.y, rx, ry)
        idx = np.flatnonzero(bad)
        bad = np.zeros_like(bad)
        bad[idx[bad_again]] = True
    return theta, n_degenerate


def _check_degenerate(count: int, n: int):
    budget = max(DEGENERATE_BUDGET, DEGENERATE_BUDGET * n / 1e6)
    if count > budget:
        raise SimulationError(
            f"{count} degenerate darts in {n} draws exceeds budget {budget:g}; "
            "geometry or RNG is broken"
        )


def simulate_shadows(mu: PlanePoint, n: int, rng: RandomStream, workers: int = 1) -> np.ndarray:
    """Shadow angles of ``n`` uniform darts lit from ``mu``."""
    _check_source(mu)
    parts = _map_chunks(lambda g, s: _shadow_chunk(g, s, mu), n, rng, workers)
    _check_degenerate(sum(p[1] for p in parts), n)
    return np.concatenate([p[0] for p in parts])


def _shadow_moments(mu, n, rng, workers, summarize):
    _check_n(n)
    _check_source(mu)

    def run(g, s):
        theta, n_bad = _shadow_chunk(g, s, mu)
        return _Moments.of(summarize(theta)), n_bad

    parts = _map_chunks(run, n, rng, workers)
    _check_degenerate(sum(p[1] for p in parts), n)
    return _reduce([p[0] for p in parts])


def estimate_mean_shadow(mu: PlanePoint, n: int, rng: RandomStream, workers: int = 1) -> MeanShadow:
    """Monte Carlo mean of the shadow point ``X`` with per-coordinate standard errors."""
    m = _shadow_moments(mu, n, rng, workers, lambda t: np.column_stack((np.cos(t), np.sin(t))))
    se = m.std_error()
    return MeanShadow(PlanePoint(float(m.mean[0]), float(m.mean[1])), (float(se[0]), float(se[1])), m.n)


def estimate_shadow_risk(
    mu: PlanePoint, c: float, n: int, rng: RandomStream, workers: int = 1
) -> RiskEstimate:
    """Monte Carlo estimate of ``E|c*X - mu|^2``."""
    if not math.isfinite(c):
        raise DomainError(f"c must be finite, got {c!r}")

    def loss(t):
        ex = c * np.cos(t) - mu.x
        ey = c * np.sin(t) - mu.y
        return ex * ex + ey * ey

    m = _shadow_moments(mu, n, rng, workers, loss)
    return RiskEstimate(float(m.mean), float(m.std_error()), m.n)


def chi_square_gof(
    mu: PlanePoint,
    n: int,
    bins: int,
    source: str,
    rng: RandomStream,
    workers: int = 1,
) -> GofReport:
    """Pearson chi-square of binned shadow angles against the closed-form law.

    ``source`` selects the sampler: ``'geometric'`` (darts and rays) or
    ``'inverse_cdf'`` (bisection on the CDF).  Bins are equal-width on
    ``[0, 2*pi)``.

    Raises
    ------
    ConfigurationError
        If ``n < 50*bins``, ``bins < 2``, or any expected count is below 5.
    """
    if isinstance(bins, bool) or int(bins) != bins or bins < 2:
        raise ConfigurationError(f"need at least 2 bins, got {bins!r}")
    if n < 50 * bins:
        raise ConfigurationError(f"need n >= 50*bins = {50 * bins}, got {n}")
    _check_source(mu)
    law = AngularLaw.from_point(mu)
    edges = np.linspace(0.0, TWO_PI, bins + 1)
    expected = n * np.diff(cdf(law, edges))
    if expected.min() < MIN_EXPECTED_COUNT:
        raise ConfigurationError(
            f"expected count {expected.min():.3g} < {MIN_EXPECTED_COUNT} in some bin; "
            "raise n or lower bins"
        )

    if source == "geometric":
        def draw(g, s):
            theta, n_bad = _shadow_chunk(g, s, mu)
            return theta, n_bad
    elif source == "inverse_cdf":
        def draw(g, s):
            return theta_from_uniform(law, g.random(s)), 0
    else:
        raise ConfigurationError(f"unknown source {source!r}; use 'geometric' or 'inverse_cdf'")

    def count(g, s):
        theta, n_bad = draw(g, s)
        return np.histogram(theta, bins=edges)[0], n_bad

    parts = _map_chunks(count, n, rng, workers)
    _check_degenerate(sum(p[1] for p in parts), n)
    observed = np.sum([p[0] for p in parts], axis=0)
    stat = float(np.sum((observed - expected) ** 2 / expected))
    return GofReport(
        statistic=stat,
        dof=bins - 1,
        bins=bins,
        n_samples=n,
        observed=tuple(int(o) for o in observed),
        expected=tuple(float(e) for e in expected),
    )


RISK_CURVE_COLUMNS = ("c", "rho", "mc_mean", "mc_std_error", "closed_form")


def risk_curve(
    c_values: Sequence[float],
    rho_values: Sequence[float],
    n: int,
    rng: RandomStream,
    workers: int = 1,
) -> list:
    """Monte Carlo vs closed-form risk of ``c*X`` on a ``c`` x ``rho`` grid.

    The source sits at ``(rho, 0)``.  Rows are dicts keyed by
    ``RISK_CURVE_COLUMNS``, ``c`` varying slowest.  Row ``k`` draws from
    ``rng.child(k)``.
    """
    c_values, rho_values = list(c_values), list(rho_values)
    if not c_values or not rho_values:
        raise ConfigurationError("risk_curve needs non-empty c and rho lists")
    _check_n(n)
    rows = []
    for i, c in enumerate(c_values):
        for j, rho in enumerate(rho_values):
            k = i * len(rho_values) + j
            est = estimate_shadow_risk(PlanePoint(float(rho), 0.0), float(c), n, rng.child(k), workers)
            rows.append(
                dict(zip(RISK_CURVE_COLUMNS, (float(c), float(rho), est.mean, est.std_error, float(shadow_mse(c, rho)))))
            )
    return rows


# -- Gaussian variance estimators -------------------------------------------


def simulate_variance_estimators(
    n: int, sigma2: float, reps: int, rng: RandomStream, workers: int = 1
) -> dict:
    """Replicate ``reps`` Gaussian samples of size ``n`` and summarise S^2 and T^2.

    Returns :class:`RiskEstimate` values under keys ``mean_s2``, ``mean_t2``,
    ``mse_s2`` and ``mse_t2``.
    """
    variance_estimator_mse(n, sigma2)  # validates n and sigma2
    _check_n(reps)
    sd = math.sqrt(sigma2)

    def run(g, s):
        s2, t2 = batch_variance_estimators(g.normal(0.0, sd, size=(s, n)))
        return _Moments.of(np.column_stack((s2, t2, (s2 - sigma2) ** 2, (t2 - sigma2) ** 2)))

    m = _reduce(_map_chunks(run, reps, rng, workers))
    se = m.std_error()
    keys = ("mean_s2", "mean_t2", "mse_s2", "mse_t2")
    return {k: RiskEstimate(float(m.mean[i]), float(se[i]), m.n) for i, k in enumerate(keys)}
