"""Host sphere with an interior point source, surrounded by point scatterers.

The cluster is a penetrable host sphere enclosing a monopole source, plus
``N - 1`` point scatterers in the lossless exterior. Each point scatterer
radiates an isotropic spherical wave of strength ``A_n``. The waves and the
interior source are the ``N`` sources exciting a single penetrable sphere, so
the whole problem reduces to ``N`` independent point-source/sphere solves
(:func:`clusterflux.host_sphere.solve_host`) superposed at field level.

Members are ordered with the point scatterers first (indices ``0..N-2``) and
the host last (index ``N-1``).

Attribution
-----------
The default ``"host"`` attribution assigns to the host its whole exterior
scattered field: the field radiated by the interior source plus the host's
re-scattering of every point-scatterer wave. Each point scatterer is assigned
only its own spherical wave. ``"per_source"`` instead moves the host's
re-scattering of wave ``n`` to scatterer ``n``. Inside the host both
attributions use the same family: the response to the interior source
(assigned to the host) and the transmitted part of each wave (assigned to the
scatterer that emitted it). The interior primary field is kept separate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .crosssec import point_source_pattern
from .fields import EXTERIOR, HOST, FieldSample, PointScatterer, PointSource, primary_field
from .host_sphere import HostSphere, SeriesSolution, evaluate, far_field, solve_host
from .media import DerivedMedium, DomainError, Medium, derive
from .quadrature import SphericalGrid, default_sphere_grid
from .specfun import L_MAX_DEFAULT

HOST_ATTRIBUTION = "host"
PER_SOURCE_ATTRIBUTION = "per_source"
FIXED = "fixed"
SELF_CONSISTENT = "self_consistent"
_SURFACE_TOL = 1e-12


class FoldyDivergenceError(RuntimeError):
    """Self-consistent strengths could not be determined."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


class HostSolveError(RuntimeError):
    """A host transmission solve failed for a particular cluster member."""

    def __init__(self, member, cause):
        super().__init__(f"host solve failed for member {member}: {cause}")
        self.member = member


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Geometry, media and sources of a cluster.

    Parameters
    ----------
    host : HostSphere
        Penetrable host sphere (possibly lossy).
    exterior : Medium
        Surrounding medium; must be lossless.
    source : PointSource
        Monopole strictly inside the host.
    scatterers : sequence of PointScatterer
        Point scatterers strictly outside the host, at distinct positions.
    omega : float
        Angular frequency in rad/s.
    """

    host: HostSphere
    exterior: Medium
    source: PointSource
    scatterers: tuple = ()
    omega: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if not self.exterior.lossless:
            raise DomainError("exterior medium must be lossless (delta = 0)")
        R = self.host.radius
        if not np.linalg.norm(self.source.position - self.host.center) < R:
            raise DomainError("source must lie strictly inside the host")
        pos = [s.position for s in self.scatterers]
        for i, p in enumerate(pos):
            if not np.linalg.norm(p - self.host.center) > R:
                raise DomainError(f"scatterer {i} must lie strictly outside the host")
            for j in range(i):
                if np.array_equal(p, pos[j]):
                    raise DomainError(f"scatterers {j} and {i} share a position")

    @property
    def N(self) -> int:
        """Number of cluster members, host included."""
        return len(self.scatterers) + 1

    @property
    def host_dm(self) -> DerivedMedium:
        return derive(self.host.medium, self.omega)

    @property
    def exterior_dm(self) -> DerivedMedium:
        return derive(self.exterior, self.omega)

    @property
    def strengths(self) -> np.ndarray:
        return np.array([s.strength for s in self.scatterers], dtype=complex)

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.scatterers], dtype=float).reshape(-1, 3)

    def with_strengths(self, strengths) -> "ClusterModel":
        strengths = np.asarray(strengths, dtype=complex).ravel()
        if strengths.size != len(self.scatterers):
            raise DomainError("one strength per scatterer required")
        return replace(self, scatterers=tuple(
            s.with_strength(a) for s, a in zip(self.scatterers, strengths)))

    def with_omega(self, omega: float) -> "ClusterModel":
        return replace(self, omega=float(omega))

    def scaled(self, c: complex) -> "ClusterModel":
        """All source amplitudes and strengths multiplied by ``c``."""
        src = PointSource(self.source.position, c * self.source.amplitude)
        return replace(self, source=src).with_strengths(c * self.strengths)


@dataclass(frozen=True, eq=False)
class _UnitSolves:
    source: SeriesSolution
    waves: tuple    # unit-amplitude exterior-source solutions, one per scatterer


def _solve_all(model: ClusterModel, L: int | None, L_max: int) -> _UnitSolves:
    hdm, edm = model.host_dm, model.exterior_dm
    try:
        src = solve_host(model.source, model.host, hdm, edm, L=L, L_max=L_max)
    except (ArithmeticError, DomainError) as exc:
        raise HostSolveError(model.N - 1, exc) from exc
    if not src.converged:
        raise HostSolveError(model.N - 1, f"series tail {src.tail:.2e} at L={src.L}")
    waves = []
    for i, s in enumerate(model.scatterers):
        try:
            waves.append(solve_host(PointSource(s.position, 1.0), model.host, hdm, edm,
                                    L=L, L_max=L_max))
        except (ArithmeticError, DomainError) as exc:
            raise HostSolveError(i, exc) from exc
        if not waves[-1].converged:
            raise HostSolveError(i, f"series tail {waves[-1].tail:.2e} at L={waves[-1].L}")
    return _UnitSolves(src, tuple(waves))


def _band_limit(model, L_used):
    # patterns of the waves carry phases exp(-i k0 rhat.b_n): resolve them too
    k0 = model.exterior_dm.k.real
    return max(L_used, math.ceil(k0 * bounding_radius(model)) + 12)


def _green(k0, x, y):
    d = float(np.linalg.norm(x - y))
    return np.exp(1j * k0 * d) / d


def _coupling(model: ClusterModel, solves: _UnitSolves):
    """Excitation by the interior source and the wave-to-wave operator at the b_n."""
    B = model.positions
    M = len(B)
    k0 = model.exterior_dm.k
    u_src = evaluate(solves.source, B, EXTERIOR).value if M else np.zeros(0, complex)
    C = np.zeros((M, M), dtype=complex)
    for m, sol in enumerate(solves.waves):
        C[:, m] = evaluate(sol, B, EXTERIOR).value
        for n in range(M):
            if n != m:
                C[n, m] += _green(k0, B[n], B[m])
    return u_src, C


@dataclass
class FoldyResult:
    strengths: np.ndarray
    mode: str
    iterations: int = 0
    history: list = field(default_factory=list)
    direct_solve: bool = False


def foldy_strengths(model: ClusterModel, mode: str = FIXED, tol: float = 1e-12,
                    max_iter: int = 200, L: int | None = None,
                    L_max: int = L_MAX_DEFAULT, _solves: _UnitSolves | None = None
                    ) -> FoldyResult:
    """Strengths of the point scatterers.

    In ``"fixed"`` mode the strengths stored on the model are returned
    unchanged. In ``"self_consistent"`` mode each strength is its monopole
    coefficient times the field exciting it,
    ``A_n = f_n [u_src(b_n) + sum_m C_nm A_m]``, where ``u_src`` is the field
    radiated out of the host by the interior source and ``C_nm`` is the field at
    ``b_n`` of a unit wave from ``b_m``: its host re-scattering, plus the wave
    itself when ``m != n``. The system is first iterated with damping 0.5; if
    that does not reach ``tol`` within ``max_iter`` steps it is solved directly.

    Raises
    ------
    FoldyDivergenceError
        If the direct solve is singular; carries the residual history.
    """
    if mode == FIXED:
        return FoldyResult(model.strengths.copy(), FIXED)
    if mode != SELF_CONSISTENT:
        raise DomainError(f"unknown coupling mode {mode!r}")
    if any(s.monopole_coefficient is None for s in model.scatterers):
        raise DomainError("self-consistent mode needs a monopole coefficient on "
                          "every scatterer")
    if not model.scatterers:
        return FoldyResult(np.zeros(0, complex), SELF_CONSISTENT)
    solves = _solves or _solve_all(model, L, L_max)
    u_src, C = _coupling(model, solves)
    f = np.array([s.monopole_coefficient for s in model.scatterers])
    rhs = f * u_src
    A = rhs.copy()
    history = []
    scale = max(float(np.max(np.abs(rhs))), 1e-300)
    for it in range(1, max_iter + 1):
        update = rhs + f * (C @ A)
        res = float(np.max(np.abs(update - A))) / scale
        history.append(res)
        if res < tol:
            return FoldyResult(A, SELF_CONSISTENT, it, history)
        if not np.isfinite(res):
            break
        A = 0.5 * A + 0.5 * update
    system = np.eye(len(f)) - f[:, None] * C
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e12:
        raise FoldyDivergenceError(
            f"self-consistent strengths undetermined (condition number {cond:.3e})",
            history)
    A = np.linalg.solve(system, rhs)
    history.append(float(np.max(np.abs(system @ A - rhs))) / scale)
    return FoldyResult(A, SELF_CONSISTENT, len(history), history, direct_solve=True)


@dataclass(frozen=True, eq=False)
class AttributedFields:
    """Single-scatterer fields of an assembled cluster.

    Field-family methods return one :class:`FieldSample` per member in the
    cluster order (point scatterers, then host).
    """

    model: ClusterModel
    strengths: np.ndarray
    source_solution: SeriesSolution
    wave_solutions: tuple      # scaled by the strengths
    grid: SphericalGrid
    attribution: str = HOST_ATTRIBUTION
    foldy: FoldyResult | None = None

    @property
    def N(self) -> int:
        return self.model.N

    @property
    def L(self) -> int:
        return max([self.source_solution.L] + [w.L for w in self.wave_solutions])

    @property
    def band_limit(self) -> int:
        """Angular degree beyond which every far-field pattern is negligible."""
        return _band_limit(self.model, self.L)

    @property
    def host_dm(self) -> DerivedMedium:
        return self.source_solution.host

    @property
    def exterior_dm(self) -> DerivedMedium:
        return self.source_solution.exterior

    @property
    def point_sources(self) -> list:
        return [PointSource(s.position, a)
                for s, a in zip(self.model.scatterers, self.strengths)]

    # -- exterior ---------------------------------------------------------
    def _distance_to_center(self, pts):
        return np.linalg.norm(pts - self.model.host.center, axis=-1) / self.model.host.radius

    def _outside(self, r):
        pts = np.asarray(r, dtype=float).reshape(-1, 3)
        # points on the surface itself are accepted from either side
        if np.any(self._distance_to_center(pts) < 1 - _SURFACE_TOL):
            raise DomainError("exterior field requested inside the host")
        return pts

    def waves(self, r) -> list:
        """Spherical wave of each point scatterer at exterior points."""
        pts = self._outside(r)
        return [primary_field(s, self.exterior_dm, pts, EXTERIOR) for s in self.point_sources]

    def host_rescattered(self, r) -> list:
        """Host re-scattering of each point-scatterer wave at exterior points."""
        pts = self._outside(r)
        return [evaluate(w, pts, EXTERIOR) for w in self.wave_solutions]

    def source_radiated(self, r) -> FieldSample:
        """Field radiated out of the host by the interior source."""
        return evaluate(self.source_solution, self._outside(r), EXTERIOR)

    def host_exterior(self, r) -> FieldSample:
        """Entire exterior scattered field of the host, ``u_0^sc``."""
        pts = self._outside(r)
        total = self.source_radiated(pts)
        for w in self.host_rescattered(pts):
            total = total + w
        return total

    def exterior_family(self, r) -> list:
        """Exterior single-scatterer fields ``u_j^0``; they sum to the total field."""
        pts = self._outside(r)
        waves = self.waves(pts)
        if self.attribution == PER_SOURCE_ATTRIBUTION:
            resc = self.host_rescattered(pts)
            return [w + s for w, s in zip(waves, resc)] + [self.source_radiated(pts)]
        return waves + [self.host_exterior(pts)]

    def exterior_total(self, r) -> FieldSample:
        fam = self.exterior_family(r)
        total = fam[0]
        for f in fam[1:]:
            total = total + f
        return total

    # -- host interior ----------------------------------------------------
    def _inside(self, r):
        pts = np.asarray(r, dtype=float).reshape(-1, 3)
        if np.any(self._distance_to_center(pts) > 1 + _SURFACE_TOL):
            raise DomainError("host field requested outside the host")
        return pts

    def primary(self, r) -> FieldSample:
        """Interior primary field ``A exp(ik_h|r-a|)/|r-a|``."""
        return primary_field(self.model.source, self.host_dm, self._inside(r), HOST)

    def host_family(self, r) -> list:
        """Host-interior single-scatterer fields (transmitted waves, then host response)."""
        pts = self._inside(r)
        fam = [evaluate(w, pts, HOST) for w in self.wave_solutions]
        return fam + [evaluate(self.source_solution, pts, HOST)]

    def host_scattered(self, r) -> FieldSample:
        """``u_h^sc``: everything in the host except the interior primary field."""
        fam = self.host_family(r)
        total = fam[0]
        for f in fam[1:]:
            total = total + f
        return total

    def host_total(self, r) -> FieldSample:
        return self.primary(r) + self.host_scattered(r)

    # -- far field --------------------------------------------------------
    def patterns(self, grid: SphericalGrid | None = None) -> list:
        """Far-field pattern of every member on ``grid`` (default: the assembly grid)."""
        grid = grid or self.grid
        k0 = self.exterior_dm.k.real
        waves = [point_source_pattern(s.amplitude, s.position, grid, k0)
                 for s in self.point_sources]
        resc = [far_field(w, grid) for w in self.wave_solutions]
        src = far_field(self.source_solution, grid)
        if self.attribution == PER_SOURCE_ATTRIBUTION:
            return [w + s for w, s in zip(waves, resc)] + [src]
        host = src
        for s in resc:
            host = host + s
        return waves + [host]


def assemble(model: ClusterModel, L: int | None = None,
             grid: SphericalGrid | None = None, mode: str = FIXED,
             attribution: str = HOST_ATTRIBUTION, tol: float = 1e-12,
             max_iter: int = 200, L_max: int = L_MAX_DEFAULT) -> AttributedFields:
    """Solve every source/host problem and attribute the fields to members.

    Parameters
    ----------
    model : ClusterModel
    L : int, optional
        Series truncation for every solve; automatic when omitted.
    grid : SphericalGrid, optional
        Far-field grid; defaults to :func:`default_sphere_grid` at the largest
        truncation used.
    mode : {"fixed", "self_consistent"}
        How point-scatterer strengths are obtained (see :func:`foldy_strengths`).
    attribution : {"host", "per_source"}
        Where the host's re-scattering of the point-scatterer waves is assigned.
    """
    if attribution not in (HOST_ATTRIBUTION, PER_SOURCE_ATTRIBUTION):
        raise DomainError(f"unknown attribution {attribution!r}")
    solves = _solve_all(model, L, L_max)
    foldy = foldy_strengths(model, mode, tol=tol, max_iter=max_iter, _solves=solves)
    A = foldy.strengths
    waves = tuple(w.scaled(a) for w, a in zip(solves.waves, A))
    if grid is None:
        L_used = max([solves.source.L] + [w.L for w in waves])
        grid = default_sphere_grid(_band_limit(model, L_used))
    return AttributedFields(model=model.with_strengths(A), strengths=A,
                            source_solution=solves.source, wave_solutions=waves,
                            grid=grid, attribution=attribution, foldy=foldy)


def monopole_coefficient_lossless(s: float, k0: float) -> complex:
    """Monopole coefficient ``s / (1 - i k0 s)`` of a point scatterer that neither
    absorbs nor generates power when driven self-consistently."""
    return s / (1 - 1j * k0 * s)


def bounding_radius(model: ClusterModel, about=(0.0, 0.0, 0.0)) -> float:
    """Radius of the smallest origin-centred sphere containing the cluster."""
    c = np.asarray(about, dtype=float)
    r = np.linalg.norm(model.host.center - c) + model.host.radius
    if model.scatterers:
        r = max(r, float(np.max(np.linalg.norm(model.positions - c, axis=-1))))
    return float(r)


def random_cluster(rng: np.random.Generator, n_scatterers: int | None = None,
                   omega: float | None = None, lossy: bool | None = None) -> ClusterModel:
    """Random cluster for property suites.

    Host radius 1, exterior ``rho = gamma = 1``, host contrasts in
    ``[0.5, 2]``, source anywhere within 0.8 of the centre, scatterers at
    distances 1.4 to 2.5 with complex strengths of modulus up to 1.
    """
    n = int(rng.integers(1, 6)) if n_scatterers is None else int(n_scatterers)
    omega = float(rng.uniform(0.5, 3.0)) if omega is None else float(omega)
    lossy = bool(rng.integers(0, 2)) if lossy is None else lossy
    rho_h, gamma_h = rng.uniform(0.5, 2.0, size=2)
    delta = float(rng.uniform(0.05, 0.5)) / (omega * gamma_h) if lossy else 0.0
    host = HostSphere(np.zeros(3), 1.0, Medium(float(rho_h), float(gamma_h), delta))

    def direction():
        v = rng.normal(size=3)
        return v / np.linalg.norm(v)

    src = PointSource(0.8 * rng.uniform() ** (1 / 3) * direction(),
                      complex(*rng.normal(size=2)))
    scat = []
    for _ in range(n):
        A = rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        scat.append(PointScatterer(rng.uniform(1.4, 2.5) * direction(), A))
    return ClusterModel(host, Medium(1.0, 1.0), src, tuple(scat), omega)


__all__ = ["random_cluster", "ClusterModel", "AttributedFields", "FoldyResult", "FoldyDivergenceError",
           "HostSolveError", "assemble", "foldy_strengths", "bounding_radius",
           "monopole_coefficient_lossless", "HOST_ATTRIBUTION", "PER_SOURCE_ATTRIBUTION",
           "FIXED", "SELF_CONSISTENT"]
