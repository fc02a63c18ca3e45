"""Pressure fields, acoustic intensities and energy densities at sample points.

Fields are carried around as :class:`FieldSample` objects holding the complex
pressure and its analytic gradient at an array of points. Intensities use the
complex form ``I = i/(omega conj(beta)) u grad(conj u)``; its real part is the
active intensity and its imaginary part the reactive intensity.

For a family of fields ``u_1..u_N`` the *direct* part of a quadratic quantity
collects the self terms and the *interaction* part the cross terms, summed over
unordered pairs, so that direct + interaction reproduces the quantity of the
summed field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .media import DerivedMedium, DomainError
from .specfun import SingularityError

EXTERIOR = "exterior"
HOST = "host"
SOURCE_REGION = "source-region"


@dataclass(frozen=True)
class PointSource:
    """Monopole ``A exp(ik|r-a|)/|r-a|`` located at ``position``."""

    position: np.ndarray
    amplitude: complex = 1.0

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not np.isfinite(self.amplitude) or not np.all(np.isfinite(pos)):
            raise DomainError("point source position and amplitude must be finite")


@dataclass(frozen=True)
class PointScatterer:
    """Point-like cluster member radiating an isotropic wave of given strength.

    ``monopole_coefficient`` (``f``) is only used by the self-consistent mode,
    where the strength is ``f`` times the field exciting the scatterer.
    """

    position: np.ndarray
    strength: complex = 0.0
    monopole_coefficient: complex | None = None

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "strength", complex(self.strength))
        if self.monopole_coefficient is not None:
            object.__setattr__(self, "monopole_coefficient",
                               complex(self.monopole_coefficient))

    def with_strength(self, strength: complex) -> "PointScatterer":
        return PointScatterer(self.position, strength, self.monopole_coefficient)

    def as_source(self) -> PointSource:
        return PointSource(self.position, self.strength)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Complex pressure ``value`` (shape ``(M,)``) and gradient (``(M, 3)``)."""

    value: np.ndarray
    gradient: np.ndarray
    region: str = EXTERIOR

    def __add__(self, other: "FieldSample") -> "FieldSample":
        return FieldSample(self.value + other.value, self.gradient + other.gradient,
                           self.region)

    def __mul__(self, c) -> "FieldSample":
        return FieldSample(c * self.value, c * self.gradient, self.region)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, m: int, region: str = EXTERIOR) -> "FieldSample":
        return cls(np.zeros(m, dtype=complex), np.zeros((m, 3), dtype=complex), region)

    def radial_derivative(self, normals) -> np.ndarray:
        return np.einsum("mi,mi->m", self.gradient, np.asarray(normals))


def superpose(samples: Sequence[FieldSample]) -> FieldSample:
    total = samples[0]
    for s in samples[1:]:
        total = total + s
    return total


@dataclass(frozen=True)
class DensitySet:
    """Potential, kinetic and Lagrangian energy densities (J/m^3)."""

    potential: np.ndarray
    kinetic: np.ndarray

    @property
    def lagrangian(self) -> np.ndarray:
        return self.kinetic - self.potential


def _points(r):
    r = np.asarray(r, dtype=float)
    return r.reshape(-1, 3)


def primary_field(source: PointSource, dm: DerivedMedium, r,
                  region: str = EXTERIOR) -> FieldSample:
    """Field of a point source and its analytic gradient at points ``r``."""
    pts = _points(r)
    d = pts - source.position
    dist = np.linalg.norm(d, axis=-1)
    if np.any(dist == 0):
        raise SingularityError("primary field evaluated at the source position")
    k = dm.k
    u = source.amplitude * np.exp(1j * k * dist) / dist
    du = u * (1j * k - 1 / dist)
    grad = (du / dist)[:, None] * d
    return FieldSample(u, grad, region)


def _prefactor(dm: DerivedMedium) -> complex:
    return 1j / (dm.omega * np.conj(dm.beta))


def intensity(u: FieldSample, dm: DerivedMedium) -> np.ndarray:
    """Complex intensity ``(i/(omega conj beta)) u grad(conj u)``, shape ``(M, 3)``."""
    return _prefactor(dm) * u.value[:, None] * np.conj(u.gradient)


def cross_intensity(u: FieldSample, v: FieldSample, dm: DerivedMedium) -> np.ndarray:
    """Symmetric cross term ``(i/(omega conj beta)) (u grad conj v + v grad conj u)``."""
    return _prefactor(dm) * (u.value[:, None] * np.conj(v.gradient)
                             + v.value[:, None] * np.conj(u.gradient))


def split_intensity(samples: Sequence[FieldSample], dm: DerivedMedium):
    """Direct and interaction intensities of a field family.

    Returns ``(direct, interaction)``; their sum is the intensity of the
    summed field.
    """
    if len(samples) == 0:
        raise DomainError("need at least one field")
    direct = sum(intensity(s, dm) for s in samples)
    total = intensity(superpose(samples), dm)
    return direct, total - direct


def densities(u: FieldSample, dm: DerivedMedium) -> DensitySet:
    pot = 0.5 * dm.gamma * np.abs(u.value) ** 2
    kin = dm.rho * np.sum(np.abs(u.gradient) ** 2, axis=-1) / (
        2 * dm.omega**2 * abs(dm.beta) ** 2)
    return DensitySet(pot, kin)


def cross_densities(u: FieldSample, v: FieldSample, dm: DerivedMedium) -> DensitySet:
    """Cross-term densities ``gamma Re(u conj v)`` and the kinetic analogue."""
    pot = dm.gamma * np.real(u.value * np.conj(v.value))
    kin = dm.rho * np.real(np.sum(u.gradient * np.conj(v.gradient), axis=-1)) / (
        dm.omega**2 * abs(dm.beta) ** 2)
    return DensitySet(pot, kin)


def split_densities(samples: Sequence[FieldSample], dm: DerivedMedium):
    """Direct and interaction energy densities of a field family."""
    if len(samples) == 0:
        raise DomainError("need at least one field")
    parts = [densities(s, dm) for s in samples]
    direct = DensitySet(sum(p.potential for p in parts), sum(p.kinetic for p in parts))
    total = densities(superpose(samples), dm)
    return direct, DensitySet(total.potential - direct.potential,
                              total.kinetic - direct.kinetic)
