"""Linear estimators ``c*X`` of the source location and their risks.

``c = 0`` is the rotation-invariant prior guess, ``c = -2`` the unique unbiased
choice (``E(X) = -mu/2``), and ``c = -1/4`` the posterior mean under a uniform
prior on the disk.  Risks use squared Euclidean loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from shadowlab.errors import DomainError
from shadowlab.geometry import TWO_PI, PlanePoint

UNBIASED_C = -2.0
BAYES_C = -0.25
PRIOR_C = 0.0
POSTERIOR_PANELS = 512

__all__ = [
    "BAYES_C",
    "LinearShadowEstimator",
    "POSTERIOR_PANELS",
    "PRIOR_C",
    "PosteriorLaw",
    "UNBIASED_C",
    "bayes_risk",
    "linear_estimate",
    "minimize_bayes_risk",
    "posterior_density",
    "posterior_mean_numeric",
    "posterior_normalization",
    "shadow_mse",
]


@dataclass(frozen=True)
class LinearShadowEstimator:
    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise DomainError(f"coefficient must be finite, got {self.c}")

    def __call__(self, theta: float) -> PlanePoint:
        return linear_estimate(self, theta)


@dataclass(frozen=True)
class PosteriorLaw:
    """Posterior of the source location given the observed shadow angle ``theta``."""

    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise DomainError(f"theta must be finite, got {self.theta}")


def linear_estimate(e: LinearShadowEstimator, theta: float) -> PlanePoint:
    return PlanePoint(e.c * math.cos(theta), e.c * math.sin(theta))


def _check_rho(rho):
    r = np.asarray(rho, dtype=float)
    if np.any(~(r >= 0.0)) or np.any(r > 1.0):
        raise DomainError("rho must lie in [0, 1]")


def posterior_density(p: PosteriorLaw, rho, phi):
    """Posterior density ``(1 - rho*cos(theta - phi)) * rho / pi`` w.r.t. ``drho dphi``."""
    _check_rho(rho)
    val = (1.0 - rho * np.cos(p.theta - phi)) * rho / math.pi
    val = np.maximum(val, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def _simpson_2d(values, rho, phi):
    return simpson(simpson(values, x=phi, axis=1), x=rho)


def _posterior_grid(p: PosteriorLaw, panels: int):
    if panels < 8:
        raise DomainError(f"need at least 8 panels, got {panels}")
    if panels % 2:
        panels += 1
    rho = np.linspace(0.0, 1.0, panels + 1)
    phi = np.linspace(0.0, TWO_PI, panels + 1)
    R, P = np.meshgrid(rho, phi, indexing="ij")
    return rho, phi, R, P, posterior_density(p, R, P)


def posterior_normalization(p: PosteriorLaw, panels: int = POSTERIOR_PANELS) -> float:
    """Simpson integral of the posterior density over the disk (should be 1)."""
    rho, phi, _, _, dens = _posterior_grid(p, panels)
    return float(_simpson_2d(dens, rho, phi))


def posterior_mean_numeric(p: PosteriorLaw, panels: int = POSTERIOR_PANELS) -> PlanePoint:
    """Posterior mean of the source by composite Simpson over ``[0,1] x [0,2*pi]``.

    The closed form is ``-(cos theta, sin theta) / 4``; this routine computes
    it by quadrature without using that result.
    """
    rho, phi, R, P, dens = _posterior_grid(p, panels)
    mx = _simpson_2d(R * np.cos(P) * dens, rho, phi)
    my = _simpson_2d(R * np.sin(P) * dens, rho, phi)
    return PlanePoint(float(mx), float(my))


def shadow_mse(c, rho):
    """``E|c*X - mu|^2`` for a source at radius ``rho``: ``c^2 + rho^2 (1 + c)``.

    Follows from ``|X| = 1`` and ``E(X) = -mu/2``.
    """
    _check_rho(rho)
    return c * c + rho * rho * (1.0 + c)


def bayes_risk(c):
    """Prior-averaged ``shadow_mse``; uniform prior gives ``E[rho^2] = 1/2``."""
    return c * c + 0.5 * c + 0.5


def minimize_bayes_risk(c_lo: float, c_hi: float, step: float):
    """Grid argmin of :func:`bayes_risk` on ``c_lo, c_lo + step, ..., <= c_hi``.

    Ties go to the smaller ``c``.  Returns ``(c_star, risk)``.
    """
    if not (math.isfinite(c_lo) and math.isfinite(c_hi) and math.isfinite(step)):
        raise DomainError("grid bounds and step must be finite")
    if step <= 0 or c_lo > c_hi:
        raise DomainError("empty grid: need c_lo <= c_hi and step > 0")
    # grid points as c_lo + k*step so -0.25 is hit exactly on decimal grids
    n = int(math.floor((c_hi - c_lo) / step + 1e-9)) + 1
    grid = np.array([_snap(c_lo + k * step, step) for k in range(n)])
    risks = bayes_risk(grid)
    k = int(np.argmin(risks))  # first minimum, i.e. the smaller c
    return float(grid[k]), float(risks[k])


def _snap(c: float, step: float) -> float:
    # strip accumulated binary noise (e.g. -0.25000000000000006) from grid points
    digits = max(0, -math.floor(math.log10(step)) + 6)
    return round(c, digits)
