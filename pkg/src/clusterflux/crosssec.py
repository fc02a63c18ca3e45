"""Scattering cross sections, their ratios, closed forms and bound checks.

Cross sections are computed from far-field patterns sampled on a common
:class:`~clusterflux.quadrature.SphericalGrid`. For a family of single-scatterer
patterns ``g_1..g_N`` the overall cross section splits into the direct part
``sum sigma_j`` and the cluster-interaction part ``sigma_c`` (cross terms,
which may be negative).

The bounds checked by :func:`check_bounds` and :func:`removal_contribution`
are evaluated exactly as stated; where a stated bound is not implied by the
Cauchy-Schwarz argument it rests on, the record also carries the sharp bound
that the argument does give (``*_sharp`` fields), so violations can be told
apart from pipeline bugs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .media import DomainError
from .quadrature import SphericalGrid, integrate_sphere
from .specfun import sph_bessel_j


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    grid: SphericalGrid
    samples: np.ndarray
    k0: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.grid.size,):
            raise DomainError("pattern sample count differs from grid size")
        if not (self.k0 > 0):
            raise DomainError("k0 must be positive")

    def __add__(self, other: "FarFieldPattern") -> "FarFieldPattern":
        _check_same([self, other])
        return FarFieldPattern(self.grid, self.samples + other.samples, self.k0)

    def __mul__(self, c) -> "FarFieldPattern":
        return FarFieldPattern(self.grid, c * self.samples, self.k0)

    __rmul__ = __mul__


def _check_same(patterns):
    first = patterns[0]
    for p in patterns[1:]:
        if not p.grid.same_as(first.grid):
            raise DomainError("patterns sampled on different grids")
        if not math.isclose(p.k0, first.k0, rel_tol=1e-14):
            raise DomainError("patterns have different wavenumbers")


def point_source_pattern(amplitude: complex, position, grid: SphericalGrid,
                         k0: float) -> FarFieldPattern:
    """Pattern ``i k0 A exp(-i k0 rhat.b)`` of a bare monopole at ``b``."""
    pos = np.asarray(position, dtype=float)
    return FarFieldPattern(grid, 1j * k0 * amplitude * np.exp(-1j * k0 * grid.nodes @ pos),
                           k0)


def scs(pattern: FarFieldPattern) -> float:
    """Scattering cross section ``(1/k0^2) int |g|^2``."""
    return float(integrate_sphere(np.abs(pattern.samples) ** 2, pattern.grid)) / pattern.k0**2


def sum_patterns(patterns: Sequence[FarFieldPattern]) -> FarFieldPattern:
    _check_same(patterns)
    return FarFieldPattern(patterns[0].grid,
                           np.sum([p.samples for p in patterns], axis=0),
                           patterns[0].k0)


def interaction_cs(patterns: Sequence[FarFieldPattern], double_sum: bool = False) -> float:
    """Cluster-interaction cross section of a pattern family.

    By default ``scs(sum) - sum(scs)``; ``double_sum=True`` evaluates the
    ordered ``k != m`` cross-term sum directly instead.
    """
    if len(patterns) < 2:
        raise DomainError("interaction cross section needs at least two patterns")
    _check_same(patterns)
    if double_sum:
        G = np.array([p.samples for p in patterns])
        gram = (G * patterns[0].grid.weights) @ G.conj().T
        total = gram.sum() - np.trace(gram)
        return float(total.real) / patterns[0].k0**2
    return scs(sum_patterns(patterns)) - sum(scs(p) for p in patterns)


def primary_interaction_cs_closed(strengths, positions, k0: float) -> float:
    """``4 pi sum_{k != m} A_k conj(A_m) j_0(k0 |b_k - b_m|)``."""
    A = np.asarray(strengths, dtype=complex)
    B = np.asarray(positions, dtype=float).reshape(-1, 3)
    if A.size < 2:
        raise DomainError("need at least two scatterers")
    D = np.linalg.norm(B[:, None, :] - B[None, :, :], axis=-1)
    off = ~np.eye(A.size, dtype=bool)
    if np.any(D[off] == 0):
        raise DomainError("coincident scatterer positions")
    J = np.where(off, np.sinc(k0 * D / np.pi), 0.0)
    total = 4 * np.pi * (A[:, None] * A.conj()[None, :] * J).sum()
    if abs(total.imag) > 1e-12 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"imaginary residue {total.imag:.3e} in closed form")
    return float(total.real)


def overall_primary_cs_closed(strengths, positions, k0: float) -> float:
    """``4 pi sum_k sum_m A_k conj(A_m) j_0(k0 |b_k - b_m|)``."""
    A = np.asarray(strengths, dtype=complex)
    direct = 4 * np.pi * float(np.sum(np.abs(A) ** 2))
    if A.size < 2:
        return direct
    return direct + primary_interaction_cs_closed(A, positions, k0)


def j0(x):
    return sph_bessel_j(0, x).real


@dataclass(frozen=True)
class CrossSectionReport:
    """Overall, single-scatterer and interaction cross sections with ratios.

    ``ratio_mask`` marks which members enter ``R_min``/``R_max`` (all by
    default; the host can be excluded).
    """

    sigma: float
    sigma_j: tuple
    sigma_c: float
    ratio_mask: tuple = ()

    @property
    def N(self) -> int:
        return len(self.sigma_j)

    @property
    def sigma_direct(self) -> float:
        return float(sum(self.sigma_j))

    @property
    def ratios(self) -> tuple:
        return tuple(s / self.sigma for s in self.sigma_j)

    @property
    def R_c(self) -> float:
        return self.sigma_c / self.sigma

    @property
    def R_D(self) -> float:
        return self.sigma_direct / self.sigma

    def _masked(self):
        mask = self.ratio_mask or (True,) * self.N
        return [r for r, m in zip(self.ratios, mask) if m]

    @property
    def R_min(self) -> float:
        return min(self._masked())

    @property
    def R_max(self) -> float:
        return max(self._masked())

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "sigma_j": list(self.sigma_j),
                "sigma_c": self.sigma_c, "sigma_direct": self.sigma_direct,
                "R_j": list(self.ratios), "R_c": self.R_c, "R_D": self.R_D}


def cross_section_report(patterns: Sequence[FarFieldPattern],
                         include: Sequence[bool] | None = None) -> CrossSectionReport:
    """Compute sigma, sigma_j and sigma_c for a pattern family."""
    _check_same(patterns)
    sig_j = tuple(scs(p) for p in patterns)
    sigma = scs(sum_patterns(patterns))
    return CrossSectionReport(sigma=sigma, sigma_j=sig_j,
                              sigma_c=sigma - float(sum(sig_j)),
                              ratio_mask=tuple(include) if include is not None else ())


@dataclass
class BoundsVerdict:
    N: int
    R_c: float
    R_min: float
    R_max: float
    rc_upper: bool                  # R_c <= (N-1)/N
    rc_upper_min: bool              # R_c <= 1 - N R_min
    rc_lower_max: bool              # R_c >= 1 - N R_max
    margins: dict
    n_bounds_applicable: bool       # (N-1)/N <= 1 - N R_min
    n_bounds: bool | None           # 1/sqrt(R_max) <= N <= 1/sqrt(R_min)
    equality_rmax: bool             # R_max == 1/N^2
    equality_all: bool              # every R_n == 1/N^2
    equality_rc: bool               # R_c == (N-1)/N
    removal: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        bad = [name for name in ("rc_upper", "rc_upper_min", "rc_lower_max")
               if not getattr(self, name)]
        if self.n_bounds_applicable and not self.n_bounds:
            bad.append("n_bounds")
        if self.equality_rmax != self.equality_all:
            bad.append("equality_iff")
        for rec in self.removal:
            if rec.get("ratio_applicable") and not rec["ratio_ok"]:
                bad.append(f"ratio_bound[n={rec['n']}]")
        return bad


def check_bounds(report: CrossSectionReport, N: int | None = None,
                 patterns: Sequence[FarFieldPattern] | None = None,
                 rtol: float = 1e-9) -> BoundsVerdict:
    """Evaluate the cross-section-ratio inequalities on a report.

    ``rtol`` absorbs quadrature round-off in the comparisons (relative to
    ``max(1, |bound|)`` in ratio units). When the patterns are supplied the
    ``R_c - R_D <= sigma_n^{N-1}/sigma^N`` check is added for every ``n``
    with ``N sigma_n <= sigma_D``.
    """
    N = report.N if N is None else N
    Rc, Rmin, Rmax = report.R_c, report.R_min, report.R_max
    b1, b2, b3 = (N - 1) / N, 1 - N * Rmin, 1 - N * Rmax
    margins = {"rc_upper": b1 - Rc, "rc_upper_min": b2 - Rc, "rc_lower_max": Rc - b3}
    applicable = (N - 1) / N <= 1 - N * Rmin + rtol
    nb = None
    if applicable:
        nb = (1 / math.sqrt(Rmax) <= N * (1 + rtol)
              and N <= (1 / math.sqrt(Rmin) if Rmin > 0 else math.inf) * (1 + rtol))
    target = 1 / N**2
    close = lambda r: abs(r - target) <= 1e-9 * target
    ratios = [r for r, m in zip(report.ratios, report.ratio_mask or (True,) * N) if m]
    verdict = BoundsVerdict(
        N=N, R_c=Rc, R_min=Rmin, R_max=Rmax,
        rc_upper=Rc <= b1 + rtol, rc_upper_min=Rc <= b2 + rtol,
        rc_lower_max=Rc >= b3 - rtol, margins=margins,
        n_bounds_applicable=bool(applicable), n_bounds=nb,
        equality_rmax=close(Rmax), equality_all=all(close(r) for r in ratios),
        equality_rc=abs(Rc - b1) <= 1e-9)
    if patterns is not None:
        verdict.removal = removal_table(patterns, rtol=rtol)
    return verdict


def _ascending(patterns):
    sig = np.array([scs(p) for p in patterns])
    order = np.argsort(sig, kind="stable")
    return sig, order


def removal_contribution(patterns: Sequence[FarFieldPattern], n: int,
                         rtol: float = 1e-9) -> dict:
    """Change in sigma when the ``n``-th member (ascending sigma_j, 1-based) is removed.

    Returns the difference ``sigma^N - sigma_n^{N-1}`` together with the bound
    as stated, ``(2n-1) sigma_n + 2 (N-n-1) sigma_N``, and the sharp
    Cauchy-Schwarz bound ``sigma_n + 2 sqrt(sigma_n) sum_{j != n} sqrt(sigma_j)``
    with its ordering relaxation ``(2n-1) sigma_n + 2 (N-n) sqrt(sigma_n sigma_N)``.
    """
    N = len(patterns)
    if N < 2 or not 1 <= n <= N:
        raise DomainError(f"need N >= 2 and 1 <= n <= N (N={N}, n={n})")
    sig, order = _ascending(patterns)
    s = sig[order]
    removed = int(order[n - 1])
    sigma_N = scs(sum_patterns(patterns))
    rest = [p for i, p in enumerate(patterns) if i != removed]
    sigma_rest = scs(sum_patterns(rest))
    delta = sigma_N - sigma_rest
    sn, sN = s[n - 1], s[-1]
    bound = (2 * n - 1) * sn + 2 * (N - n - 1) * sN
    sharp = sn + 2 * math.sqrt(sn) * float(np.sum(np.sqrt(np.delete(s, n - 1))))
    relaxed = (2 * n - 1) * sn + 2 * (N - n) * math.sqrt(sn * sN)
    tol = rtol * max(sigma_N, 1e-300)
    sigma_D = float(sig.sum())
    ratio_applicable = N * sn <= sigma_D
    Rc_minus_RD = (sigma_N - 2 * sigma_D) / sigma_N
    return {"n": n, "removed_index": removed, "delta": delta, "bound": bound,
            "ok": delta <= bound + tol, "margin": bound - delta,
            "sharp_bound": sharp, "sharp_ok": delta <= sharp + tol,
            "relaxed_bound": relaxed, "relaxed_ok": delta <= relaxed + tol,
            "sigma_rest": sigma_rest,
            "ratio_applicable": bool(ratio_applicable),
            "ratio_ok": Rc_minus_RD <= sigma_rest / sigma_N + rtol}


def removal_table(patterns: Sequence[FarFieldPattern], rtol: float = 1e-9) -> list:
    return [removal_contribution(patterns, n, rtol) for n in range(1, len(patterns) + 1)]
