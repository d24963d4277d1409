"""Points in the unit disk, uniform disk sampling and shadow casting.

The shadow of a dart ``u`` lit from a source ``mu`` is the point where the
ray from ``mu`` through ``u`` leaves the unit circle.  Everything here is
exact geometry; it is the brute-force reference for the closed-form angle
law in :mod:`shadowlab.angular`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from shadowlab.errors import DegenerateRayError, DomainError

TWO_PI = 2.0 * math.pi
# slack on |p|^2 <= 1 for disk membership, and on |p|^2 == 1 for boundary points
DISK_TOL = 1e-12
DEGENERATE_RAY_TOL = 1e-14

__all__ = [
    "DegenerateRayError",
    "PlanePoint",
    "PolarPoint",
    "TWO_PI",
    "cartesian_to_polar",
    "cast_shadow",
    "cast_shadow_batch",
    "disk_point_from_uniforms",
    "polar_to_cartesian",
    "reduce_angle",
    "sample_uniform_disk",
    "sample_uniform_disk_batch",
    "shadow_parameter",
]


def reduce_angle(theta):
    """Reduce an angle (scalar or array) to ``[0, 2*pi)``."""
    if np.ndim(theta) == 0:
        r = math.fmod(float(theta), TWO_PI)
        if r < 0.0:
            r += TWO_PI
        # fmod of a tiny negative angle plus 2*pi can round up to 2*pi
        return 0.0 if r >= TWO_PI else r
    r = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    r[r >= TWO_PI] = 0.0
    return r


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite point ({self.x}, {self.y})")

    @property
    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y

    def in_disk(self, tol: float = DISK_TOL) -> bool:
        return self.norm2 <= 1.0 + tol

    def on_boundary(self, tol: float = DISK_TOL) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def rotated(self, alpha: float) -> PlanePoint:
        ca, sa = math.cos(alpha), math.sin(alpha)
        return PlanePoint(ca * self.x - sa * self.y, sa * self.x + ca * self.y)


@dataclass(frozen=True)
class PolarPoint:
    """A disk location as radius ``rho`` in [0, 1] and angle ``phi`` in [0, 2*pi)."""

    rho: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and math.isfinite(self.phi)):
            raise DomainError(f"non-finite polar point ({self.rho}, {self.phi})")
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainError(f"phi must lie in [0, 2*pi), got {self.phi}")

    @classmethod
    def normalized(cls, rho: float, phi: float) -> PolarPoint:
        """Build a point from any finite ``phi``, reducing it modulo 2*pi."""
        return cls(rho, reduce_angle(phi))


def polar_to_cartesian(p: PolarPoint) -> PlanePoint:
    return PlanePoint(p.rho * math.cos(p.phi), p.rho * math.sin(p.phi))


def cartesian_to_polar(p: PlanePoint) -> PolarPoint:
    """Convert a disk point to polar form.

    The centre maps to ``phi = 0``.  Points within the rounding slack of the
    boundary are clamped to ``rho = 1``.

    Raises
    ------
    DomainError
        If the point lies outside the closed unit disk beyond ``DISK_TOL``.
    """
    if not p.in_disk():
        raise DomainError(f"point ({p.x}, {p.y}) lies outside the unit disk")
    rho = math.hypot(p.x, p.y)
    if rho == 0.0:
        return PolarPoint(0.0, 0.0)
    return PolarPoint(min(rho, 1.0), reduce_angle(math.atan2(p.y, p.x)))


def disk_point_from_uniforms(u1, u2):
    """Map two uniforms on [0, 1) to a uniform disk point via ``r = sqrt(u1)``.

    Works elementwise on arrays; returns ``(x, y)``.
    """
    r = np.sqrt(u1)
    angle = TWO_PI * np.asarray(u2, dtype=float)
    return r * np.cos(angle), r * np.sin(angle)


def sample_uniform_disk(rng: np.random.Generator) -> PlanePoint:
    u1, u2 = rng.random(2)
    x, y = disk_point_from_uniforms(u1, u2)
    return PlanePoint(float(x), float(y))


def sample_uniform_disk_batch(rng: np.random.Generator, n: int):
    """Draw ``n`` uniform disk points; returns coordinate arrays ``(x, y)``.

    Consumes the uniforms as ``n`` radius draws followed by ``n`` angle draws.
    """
    u = rng.random((2, n))
    return disk_point_from_uniforms(u[0], u[1])


def shadow_parameter(mx, my, dx, dy):
    # positive root of |d|^2 t^2 + 2 (mu.d) t + (|mu|^2 - 1) = 0
    b = mx * dx + my * dy
    a = dx * dx + dy * dy
    k = 1.0 - (mx * mx + my * my)
    root = np.sqrt(np.maximum(b * b + a * k, 0.0))
    # for b > 0 the textbook form cancels; the product-of-roots form does not
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(b > 0.0, k / (b + root), (root - b) / a)
    return t


def cast_shadow(mu: PlanePoint, u: PlanePoint) -> float:
    """Angle in ``[0, 2*pi)`` of the shadow that ``u`` casts from a source at ``mu``.

    The shadow is the point ``mu + t*(u - mu)``, ``t > 0``, on the unit circle.

    Raises
    ------
    DegenerateRayError
        If ``u`` and ``mu`` are closer than ``1e-14``.
    DomainError
        If either point lies outside the closed disk.
    """
    if not mu.in_disk() or not u.in_disk():
        raise DomainError("source and dart must lie in the closed unit disk")
    dx, dy = u.x - mu.x, u.y - mu.y
    if math.hypot(dx, dy) < DEGENERATE_RAY_TOL:
        raise DegenerateRayError(f"dart at ({u.x}, {u.y}) coincides with the source")
    t = float(shadow_parameter(mu.x, mu.y, dx, dy))
    return reduce_angle(math.atan2(mu.y + t * dy, mu.x + t * dx))


def cast_shadow_batch(mx: float, my: float, ux, uy):
    """Vectorised :func:`cast_shadow` for one source and many darts.

    Returns ``(theta, degenerate)``; ``theta`` entries where the boolean mask
    ``degenerate`` is set are meaningless and must be resampled by the caller.
    """
    dx = np.asarray(ux, dtype=float) - mx
    dy = np.asarray(uy, dtype=float) - my
    degenerate = np.hypot(dx, dy) < DEGENERATE_RAY_TOL
    t = shadow_parameter(mx, my, dx, dy)
    theta = reduce_angle(np.arctan2(my + t * dy, mx + t * dx))
    return theta, degenerate
