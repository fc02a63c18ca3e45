"""Quadrature on the unit sphere, on spherical surfaces and over ball-shaped volumes.

Angular rules are Gauss-Legendre in ``cos(theta)`` times the uniform trapezoid
rule in ``phi``. Radial rules are Gauss-Legendre, optionally in the logarithm
of the radius for integrands that are strongly peaked at the inner radius.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .media import DomainError


class QuadratureError(ArithmeticError):
    """A sampled integrand produced a non-finite value."""


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Product rule on the unit sphere; weights sum to 4*pi."""

    nodes: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int

    @property
    def size(self) -> int:
        return self.weights.size

    def same_as(self, other: "SphericalGrid") -> bool:
        return (self is other or (self.n_theta == other.n_theta
                                  and self.n_phi == other.n_phi))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray


def sphere_grid(n_theta: int, n_phi: int) -> SphericalGrid:
    """Gauss-Legendre x trapezoid grid, exact for degree <= 2*n_theta-1 in cos(theta).

    Grids are cached and their arrays are read-only.
    """
    if n_theta < 2 or n_phi < 4:
        raise DomainError(f"degenerate sphere grid ({n_theta}, {n_phi}); need "
                          "n_theta >= 2 and n_phi >= 4")
    return _sphere_grid(int(n_theta), int(n_phi))


@lru_cache(maxsize=64)
def _sphere_grid(n_theta: int, n_phi: int) -> SphericalGrid:
    x, wx = leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1 - x * x)
    X = np.outer(sin_t, np.cos(phi))
    Y = np.outer(sin_t, np.sin(phi))
    Z = np.repeat(x[:, None], n_phi, axis=1)
    nodes = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)
    weights = np.repeat(wx, n_phi) * (2 * np.pi / n_phi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return SphericalGrid(nodes=nodes, weights=weights, n_theta=int(n_theta),
                         n_phi=int(n_phi))


def default_sphere_grid(L_trunc: int) -> SphericalGrid:
    n_theta = max(2 * L_trunc + 8, 32)
    return sphere_grid(n_theta, 2 * n_theta)


def exact_sphere_grid(L_band: int) -> SphericalGrid:
    """Smallest product grid integrating ``f conj(g)`` exactly for degree-``L_band`` f, g."""
    return sphere_grid(L_band + 2, 2 * L_band + 4)


def radial_grid(n: int, r0: float, r1: float, log: bool = False) -> RadialGrid:
    """Gauss-Legendre nodes on ``[r0, r1]``.

    With ``log=True`` the rule is laid out in ``log r`` (requires ``r0 > 0``);
    the returned weights already include the ``dr = r dlog(r)`` factor.
    """
    if not (0 <= r0 < r1):
        raise DomainError(f"need 0 <= r0 < r1, got r0={r0}, r1={r1}")
    s, ws = leggauss(int(n))
    if log:
        if r0 <= 0:
            raise DomainError("logarithmic radial grid needs r0 > 0")
        a, b = np.log(r0), np.log(r1)
        t = 0.5 * (b - a) * (s + 1) + a
        r = np.exp(t)
        return RadialGrid(nodes=r, weights=0.5 * (b - a) * ws * r)
    r = 0.5 * (r1 - r0) * (s + 1) + r0
    return RadialGrid(nodes=r, weights=0.5 * (r1 - r0) * ws)


def _checked(values, where):
    values = np.asarray(values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.flatnonzero(bad.reshape(bad.shape[0], -1).any(axis=-1))[0])
        raise QuadratureError(f"non-finite integrand sample at {where} index {idx}")
    return values


_CHUNK = 16384


def _sample_chunked(f, pts, where):
    """Evaluate ``f`` on ``pts`` in blocks so large volume rules stay bounded in memory."""
    parts = [_checked(f(pts[i:i + _CHUNK]), where) for i in range(0, len(pts), _CHUNK)]
    return np.concatenate(parts, axis=0)


def integrate_sphere(f, grid: SphericalGrid):
    """Sum of ``w_q f(rhat_q)``.

    ``f`` is either a callable taking the ``(M, 3)`` node array or an array of
    samples whose leading axis runs over the nodes.
    """
    samples = f(grid.nodes) if callable(f) else f
    samples = _checked(samples, "sphere node")
    return np.tensordot(grid.weights, samples, axes=(0, 0))


def integrate_surface(f, grid: SphericalGrid, center, radius: float):
    """Integral over the sphere ``|r - center| = radius``.

    ``f(points, normals)`` is evaluated at the surface points with outward
    unit normals.
    """
    center = np.asarray(center, dtype=float)
    pts = center + radius * grid.nodes
    samples = _checked(f(pts, grid.nodes), "surface node")
    return radius**2 * np.tensordot(grid.weights, samples, axes=(0, 0))


def integrate_ball_shell(f, center, r0: float, r1: float, radial: int | RadialGrid,
                         angular: SphericalGrid, log: bool = False):
    """Volume integral of ``f(points)`` over ``r0 <= |r - center| <= r1``."""
    if not (0 <= r0 < r1):
        raise DomainError(f"need 0 <= r0 < r1, got r0={r0}, r1={r1}")
    rg = radial if isinstance(radial, RadialGrid) else radial_grid(radial, r0, r1, log)
    center = np.asarray(center, dtype=float)
    pts = center + rg.nodes[:, None, None] * angular.nodes[None, :, :]
    vals = _sample_chunked(f, pts.reshape(-1, 3), "shell node")
    vals = vals.reshape((rg.nodes.size, angular.size) + vals.shape[1:])
    w = (rg.weights * rg.nodes**2)[:, None] * angular.weights[None, :]
    return np.tensordot(w, vals, axes=([0, 1], [0, 1]))


def integrate_ball_minus_hole(f, sphere_center, sphere_radius: float, hole_center,
                              hole_radius: float, n_radial: int,
                              angular: SphericalGrid):
    """Volume integral of ``f`` over a ball with a smaller ball removed.

    The hole must lie strictly inside the ball. Integration uses spherical
    coordinates about the hole centre; along each direction the radial range
    runs from ``hole_radius`` to the ball surface and is sampled with a
    Gauss-Legendre rule in ``log r``, so integrands that blow up at the hole
    centre like ``1/r^2`` or ``1/r^4`` are handled without special care.
    """
    c = np.asarray(sphere_center, dtype=float)
    a = np.asarray(hole_center, dtype=float)
    off = a - c
    if np.linalg.norm(off) + hole_radius >= sphere_radius or hole_radius <= 0:
        raise DomainError("hole must be a ball of positive radius strictly "
                          "inside the sphere")
    # distance from a to the sphere along each direction
    p = angular.nodes @ off
    t = -p + np.sqrt(p * p - (off @ off - sphere_radius**2))
    s, ws = leggauss(int(n_radial))
    lo = np.log(hole_radius)
    hi = np.log(t)
    span = 0.5 * (hi - lo)
    logr = span[:, None] * (s[None, :] + 1) + lo
    r = np.exp(logr)                                   # (n_ang, n_rad)
    w = angular.weights[:, None] * span[:, None] * ws[None, :] * r**3
    pts = a + r[..., None] * angular.nodes[:, None, :]
    vals = _sample_chunked(f, pts.reshape(-1, 3), "volume node")
    vals = vals.reshape(r.shape + vals.shape[1:])
    return np.tensordot(w, vals, axes=([0, 1], [0, 1]))
