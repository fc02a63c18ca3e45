"""Point source and penetrable sphere: exact truncated Legendre-series solution.

Each problem (one point source, one sphere) is axisymmetric about the line
through the sphere centre and the source, so it is solved in that frame with
ordinary Legendre polynomials and no azimuthal modes. The source may lie
inside the sphere (the field inside is the primary wave plus a regular
response, the field outside is outgoing) or outside it (the incident wave is
scattered outside and transmitted inside).

Per degree ``n`` the two transmission conditions give a 2x2 system that is
solved in closed form. The pressure is continuous across the surface and the
normal derivatives satisfy ``(beta_h/rho_0) du_0/dn = du_h/dn``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fields import EXTERIOR, HOST, FieldSample, PointSource
from .media import DerivedMedium, DomainError, Medium
from .specfun import (L_MAX_DEFAULT, legendre_all, legendre_series, sph_h1_and_prime, sph_h1_all,
                      sph_jn_and_prime, sph_jn_all)

INTERIOR_SOURCE = "interior"
EXTERIOR_SOURCE = "exterior"
TAIL_TOL = 1e-10


class ConditioningError(ArithmeticError):
    """The per-degree transmission system is singular to working precision."""

    def __init__(self, degree, estimate):
        super().__init__(f"transmission system singular at degree {degree} "
                         f"(normalised determinant {estimate:.3e})")
        self.degree = degree


class NotConvergedError(RuntimeError):
    """Refusal to evaluate a series whose truncation tail is too large."""


@dataclass(frozen=True)
class HostSphere:
    center: np.ndarray
    radius: float
    medium: Medium

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=float).reshape(3))
        if not self.radius > 0:
            raise DomainError("host radius must be positive")

    def contains(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float).reshape(-1, 3)
        return np.linalg.norm(r - self.center, axis=-1) < self.radius


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    """Coefficients of one point-source / sphere transmission problem.

    Inside the sphere the attributed field is ``sum a_n j_n(k_h rho) P_n``
    (the response to an interior source, or the transmitted field of an
    exterior one); outside it is ``sum b_n h_n(k_0 rho) P_n`` (the whole
    radiated field of an interior source, or the scattered part for an
    exterior one). ``rho`` and the angle are measured from the sphere centre
    and ``axis``.
    """

    source_kind: str
    center: np.ndarray
    radius: float
    axis: np.ndarray
    source_distance: float
    L: int
    interior_coeffs: np.ndarray
    exterior_coeffs: np.ndarray
    host: DerivedMedium
    exterior: DerivedMedium
    amplitude: complex
    tail: float

    @property
    def converged(self) -> bool:
        return self.tail < TAIL_TOL

    @property
    def source_position(self) -> np.ndarray:
        return self.center + self.source_distance * self.axis

    def scaled(self, c: complex) -> "SeriesSolution":
        """Solution for the same geometry with the source amplitude times ``c``."""
        return replace(self, interior_coeffs=c * self.interior_coeffs,
                       exterior_coeffs=c * self.exterior_coeffs,
                       amplitude=c * self.amplitude)


def default_truncation(host_dm: DerivedMedium, ext_dm: DerivedMedium,
                       radius: float) -> int:
    L = math.ceil(abs(host_dm.k) * radius + abs(ext_dm.k) * radius) + 12
    return int(min(max(L, 16), L_MAX_DEFAULT))


def expand_source(d: float, source_inside: bool, k: complex, L: int,
                  amplitude: complex = 1.0) -> np.ndarray:
    """Degree coefficients of ``A exp(ik|r-a|)/|r-a|`` about the sphere centre.

    With ``|a| = d`` on the polar axis,
    ``exp(ik|r-a|)/|r-a| = ik sum (2n+1) j_n(k r_<) h_n(k r_>) P_n(cos g)``.
    For ``source_inside`` (evaluation radius larger than ``d``) the returned
    ``c_n`` multiply ``h_n(k r)``; otherwise they multiply ``j_n(k r)``.
    """
    if d < 0 or L < 0:
        raise DomainError("need d >= 0 and L >= 0")
    n = np.arange(L + 1)
    pref = amplitude * 1j * k * (2 * n + 1)
    if source_inside:
        return pref * sph_jn_all(L, k * d)
    if d == 0:
        raise DomainError("an outside source cannot sit at the centre")
    return pref * sph_h1_all(L, k * d)


def _per_degree(source_kind, d, R, host_dm, ext_dm, L, amplitude):
    kh, k0 = host_dm.k, ext_dm.k
    varrho = host_dm.beta / ext_dm.rho
    jh, jhp = sph_jn_and_prime(L, kh * R)
    h0, h0p = sph_h1_and_prime(L, k0 * R)
    if source_kind == INTERIOR_SOURCE:
        c = expand_source(d, True, kh, L, amplitude)
        hh, hhp = sph_h1_and_prime(L, kh * R)
        m11, m12, r1 = -jh, h0, c * hh
        m21, m22, r2 = -kh * jhp, varrho * k0 * h0p, c * kh * hhp
    else:
        e = expand_source(d, False, k0, L, amplitude)
        j0, j0p = sph_jn_and_prime(L, k0 * R)
        m11, m12, r1 = jh, -h0, e * j0
        m21, m22, r2 = kh * jhp, -varrho * k0 * h0p, varrho * k0 * e * j0p
    det = m11 * m22 - m12 * m21
    # column-normalised determinant as a scale-free singularity measure
    s1 = np.maximum(np.abs(m11), np.abs(m21))
    s2 = np.maximum(np.abs(m12), np.abs(m22))
    est = np.abs(det) / (s1 * s2)
    bad = np.flatnonzero(~(est > 1e-13))
    if bad.size:
        raise ConditioningError(int(bad[0]), float(est[bad[0]]))
    a = (r1 * m22 - m12 * r2) / det
    b = (m11 * r2 - m21 * r1) / det
    surface = np.maximum(np.abs(a * jh), np.abs(b * h0))
    peak = surface.max()
    tail = float(surface[-1] / peak) if peak > 0 else 0.0
    return a, b, tail, surface


def _extra_degrees(surface, tail) -> int:
    """Degrees to add so the tail drops below tolerance, from its recent decay rate."""
    recent = surface[-8:]
    if recent.size < 2 or recent[0] <= 0 or recent[-1] <= 0:
        return 8
    rate = (recent[-1] / recent[0]) ** (1.0 / (recent.size - 1))
    if not 0 < rate < 1:
        return 8
    return max(8, math.ceil(math.log(TAIL_TOL / tail) / math.log(rate)) + 2)


def solve_host(source: PointSource, host: HostSphere, host_dm: DerivedMedium,
               ext_dm: DerivedMedium, L: int | None = None,
               L_max: int = L_MAX_DEFAULT) -> SeriesSolution:
    """Solve the transmission problem for one point source and the host sphere.

    If ``L`` is omitted the default truncation is used and raised in steps of
    at least 8 (up to ``L_max``) until the surface tail drops below ``1e-10``;
    each step extrapolates the recent decay of the surface coefficients. An
    explicit ``L`` is used as given; check ``converged`` on the result.
    """
    if not math.isclose(host_dm.omega, ext_dm.omega, rel_tol=1e-14):
        raise DomainError("host and exterior media derived at different omega")
    offset = source.position - host.center
    d = float(np.linalg.norm(offset))
    R = host.radius
    if d < R * (1 - 1e-12):
        kind = INTERIOR_SOURCE
    elif d > R * (1 + 1e-12):
        kind = EXTERIOR_SOURCE
    else:
        raise DomainError("point source lies on the host surface")
    if d < 1e-14 * R:
        axis, d = np.array([0.0, 0.0, 1.0]), 0.0
    else:
        axis = offset / d

    auto = L is None
    L = min(default_truncation(host_dm, ext_dm, R), L_max) if auto else int(L)
    while True:
        a, b, tail, surface = _per_degree(kind, d, R, host_dm, ext_dm, L, source.amplitude)
        if not auto or tail < TAIL_TOL or L >= L_max:
            break
        L = min(L + _extra_degrees(surface, tail), L_max)
    return SeriesSolution(source_kind=kind, center=host.center.copy(), radius=R,
                          axis=axis, source_distance=d, L=L, interior_coeffs=a,
                          exterior_coeffs=b, host=host_dm, exterior=ext_dm,
                          amplitude=source.amplitude, tail=tail)


def _series_field(coeffs, regular, k, center, axis, pts, region):
    L = coeffs.size - 1
    rel = pts - center
    rho = np.linalg.norm(rel, axis=-1)
    tiny = rho < 1e-12 * max(1.0, float(np.max(rho, initial=0.0)))
    safe = np.where(tiny, 1.0, rho)
    rhat = rel / safe[:, None]
    x = np.clip(rhat @ axis, -1.0, 1.0)
    z = k * rho
    if regular:
        f, fp = sph_jn_and_prime(L, z)
    else:
        if np.any(tiny):
            raise DomainError("outgoing series evaluated at the sphere centre")
        f, fp = sph_h1_and_prime(L, z)
    P, dP = legendre_all(L, x, derivative=True)
    cf = f * coeffs
    u = np.sum(cf * P, axis=-1)
    du = k * np.sum(fp * coeffs * P, axis=-1)
    ang = np.sum(cf * dP, axis=-1) / safe
    grad = du[:, None] * rhat + ang[:, None] * (axis - x[:, None] * rhat)
    if np.any(tiny):
        # only n <= 1 survive at the centre: j_1(z) ~ z/3
        c1 = coeffs[1] if L >= 1 else 0.0
        u[tiny] = coeffs[0]
        grad[tiny] = (c1 * k / 3.0) * axis
    return FieldSample(u, grad, region)


def evaluate(solution: SeriesSolution, r, region: str | None = None) -> FieldSample:
    """Attributed field of ``solution`` and its gradient at points ``r``.

    ``region`` forces the interior (``"host"``) or exterior (``"exterior"``)
    series; by default each point uses the series of the region it lies in.
    """
    if not solution.converged:
        raise NotConvergedError(f"series not converged (tail {solution.tail:.2e} "
                                f"at L={solution.L})")
    pts = np.asarray(r, dtype=float).reshape(-1, 3)
    if region is None:
        inside = np.linalg.norm(pts - solution.center, axis=-1) < solution.radius
        if np.all(inside):
            region = HOST
        elif not np.any(inside):
            region = EXTERIOR
        else:
            out = FieldSample.zeros(len(pts))
            fi = evaluate(solution, pts[inside], HOST)
            fe = evaluate(solution, pts[~inside], EXTERIOR)
            val, grad = out.value, out.gradient
            val[inside], grad[inside] = fi.value, fi.gradient
            val[~inside], grad[~inside] = fe.value, fe.gradient
            return FieldSample(val, grad, EXTERIOR)
    if region == HOST:
        return _series_field(solution.interior_coeffs, True, solution.host.k,
                             solution.center, solution.axis, pts, HOST)
    if region == EXTERIOR:
        return _series_field(solution.exterior_coeffs, False, solution.exterior.k,
                             solution.center, solution.axis, pts, EXTERIOR)
    raise DomainError(f"unknown region {region!r}")


def far_field_samples(solution: SeriesSolution, directions) -> np.ndarray:
    """Far-field pattern ``g`` such that ``u ~ g(rhat) h_0(k_0 r)``, origin-referenced."""
    if not solution.converged:
        raise NotConvergedError("series not converged")
    if not solution.exterior.lossless:
        raise DomainError("far-field pattern needs a lossless exterior medium")
    dirs = np.asarray(directions, dtype=float).reshape(-1, 3)
    phase = (-1j) ** np.arange(solution.L + 1)
    g = legendre_series(solution.exterior_coeffs * phase,
                        np.clip(dirs @ solution.axis, -1, 1))
    k0 = solution.exterior.k.real
    return g * np.exp(-1j * k0 * (dirs @ solution.center))


def far_field(solution: SeriesSolution, grid):
    from .crosssec import FarFieldPattern
    return FarFieldPattern(grid, far_field_samples(solution, grid.nodes),
                           solution.exterior.k.real)
