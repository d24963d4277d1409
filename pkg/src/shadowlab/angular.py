"""Closed-form law of the shadow angle for a source at polar ``(rho, phi)``.

The density is ``(1 - rho*cos(theta - phi)) / (2*pi)`` on ``[0, 2*pi)``.  It is
affine in the Cartesian source position and rotates with the source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from shadowlab.errors import DomainError
from shadowlab.geometry import TWO_PI, PlanePoint, PolarPoint, cartesian_to_polar, reduce_angle

BISECTION_TOL = 1e-12
# composite Simpson panel count for normalisation / moment checks
QUAD_PANELS = 4096

__all__ = [
    "AngularLaw",
    "BISECTION_TOL",
    "QUAD_PANELS",
    "cdf",
    "density",
    "first_moment",
    "integrate_periodic",
    "sample_theta",
    "theta_from_uniform",
]


@dataclass(frozen=True)
class AngularLaw:
    source: PolarPoint

    @classmethod
    def at(cls, rho: float, phi: float = 0.0) -> AngularLaw:
        return cls(PolarPoint.normalized(rho, phi))

    @classmethod
    def from_point(cls, mu: PlanePoint) -> AngularLaw:
        return cls(cartesian_to_polar(mu))

    @property
    def rho(self) -> float:
        return self.source.rho

    @property
    def phi(self) -> float:
        return self.source.phi

    def density(self, theta):
        return density(self, theta)

    def cdf(self, theta):
        return cdf(self, theta)


def density(law: AngularLaw, theta):
    """Density of the shadow angle; accepts scalars or arrays, any finite angle."""
    th = reduce_angle(theta)
    val = (1.0 - law.rho * np.cos(th - law.phi)) / TWO_PI
    # cos rounding can push the rho = 1 zero slightly negative
    val = np.maximum(val, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def cdf(law: AngularLaw, theta):
    """``P(Theta <= theta)`` for ``theta`` in ``[0, 2*pi]``.

    Uses the antiderivative anchored at zero,
    ``(theta - rho*(sin(theta - phi) + sin(phi))) / (2*pi)``.
    """
    th = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th < 0.0) or np.any(th > TWO_PI):
        raise DomainError("cdf argument must lie in [0, 2*pi]")
    val = (th - law.rho * (np.sin(th - law.phi) + math.sin(law.phi))) / TWO_PI
    val = np.clip(val, 0.0, 1.0)
    return float(val) if val.ndim == 0 else val


def theta_from_uniform(law: AngularLaw, u, tol: float = BISECTION_TOL):
    """Invert the CDF by bisection on ``[0, 2*pi]``.

    Bisection rather than Newton: at ``rho = 1`` the density vanishes at
    ``theta = phi``.  Vectorised over ``u``.
    """
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, TWO_PI)
    n_iter = math.ceil(math.log2(TWO_PI / tol)) + 1
    rho, phi = law.rho, law.phi
    sin_phi = math.sin(phi)
    target = u * TWO_PI
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        below = mid - rho * (np.sin(mid - phi) + sin_phi) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    theta = 0.5 * (lo + hi)
    return float(theta) if theta.ndim == 0 else theta


def sample_theta(law: AngularLaw, rng: np.random.Generator, size=None):
    """Exact draw(s) from the angle law by inverse-CDF sampling."""
    return theta_from_uniform(law, rng.random(size))


def integrate_periodic(f, panels: int = QUAD_PANELS) -> float:
    """Composite Simpson integral of ``f`` over ``[0, 2*pi]``."""
    if panels % 2:
        panels += 1
    grid = np.linspace(0.0, TWO_PI, panels + 1)
    return float(simpson(f(grid), x=grid))


def first_moment(law: AngularLaw, panels: int = QUAD_PANELS):
    """Quadrature of ``(cos theta, sin theta)`` against the density, i.e. ``E(X)``."""
    mx = integrate_periodic(lambda t: np.cos(t) * density(law, t), panels)
    my = integrate_periodic(lambda t: np.sin(t) * density(law, t), panels)
    return PlanePoint(mx, my)
