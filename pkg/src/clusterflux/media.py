"""Homogeneous acoustic media and their frequency-dependent parameters.

A :class:`Medium` stores only the frequency-independent constants. Call
:func:`derive` (or :meth:`Medium.at`) to obtain the complex effective density,
wavenumber and specific admittance at a given angular frequency, so that one
medium can be reused across a frequency sweep.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


@dataclass(frozen=True)
class Medium:
    """Homogeneous fluid described by SI constants.

    Parameters
    ----------
    rho : float
        Mass density (kg/m^3), strictly positive.
    gamma : float
        Mean compressibility (1/Pa), strictly positive.
    delta : float
        Compressional viscosity (Pa s); zero for a lossless medium.
    """

    rho: float
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("rho", "gamma", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.rho <= 0:
            raise DomainError(f"rho must be positive, got {self.rho!r}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if self.delta < 0:
            raise DomainError(f"delta must be non-negative, got {self.delta!r}")

    @property
    def lossless(self) -> bool:
        return self.delta == 0.0

    def at(self, omega: float) -> "DerivedMedium":
        return derive(self, omega)


@dataclass(frozen=True)
class DerivedMedium:
    """Medium parameters evaluated at one angular frequency.

    ``beta`` is the complex effective density, ``k`` the wavenumber with
    ``Im k >= 0`` and ``zeta`` the specific admittance ``1/Re[k/(omega beta)]``.
    """

    medium: Medium
    omega: float
    nu: float
    beta: complex
    k: complex
    zeta: float

    @property
    def rho(self) -> float:
        return self.medium.rho

    @property
    def gamma(self) -> float:
        return self.medium.gamma

    @property
    def lossless(self) -> bool:
        return self.medium.lossless

    @property
    def zeta_lossless(self) -> float:
        """sqrt(rho/gamma), the admittance of the lossless counterpart."""
        return math.sqrt(self.medium.rho / self.medium.gamma)

    @property
    def loss_factor(self) -> float:
        """Im[beta/rho], the weight of the viscous dissipation terms."""
        return self.beta.imag / self.medium.rho


def derive(medium: Medium, omega: float) -> DerivedMedium:
    """Evaluate the complex density, wavenumber and admittance at ``omega``.

    Examples
    --------
    >>> dm = derive(Medium(rho=1.0, gamma=1.0), 2.0)
    >>> dm.k, dm.beta, dm.zeta
    ((2+0j), (1+0j), 1.0)
    """
    if not (math.isfinite(omega) and omega > 0):
        raise DomainError(f"omega must be positive and finite, got {omega!r}")
    nu = omega * medium.gamma * medium.delta
    if nu == 0.0:
        beta = complex(medium.rho)
    else:
        beta = medium.rho * (1 + 1j * nu) / (1 + nu * nu)
    # principal root of gamma*beta (first quadrant) already has Im >= 0
    k = omega * cmath.sqrt(medium.gamma * beta)
    if k.imag < 0:
        k = -k
    zeta = 1.0 / (k / (omega * beta)).real
    return DerivedMedium(medium=medium, omega=float(omega), nu=nu, beta=beta,
                         k=k, zeta=zeta)
