"""Numerical verification of flux, energy and cross-section identities.

Every check compares two independently computed quantities, typically a
cross section from far-field pattern quadrature against surface and volume
integrals of intensities and energy densities near the cluster. Results are
returned as :class:`VerificationResult` records.

Host-interior interaction intensity conventions
-----------------------------------------------
``"a"`` (cross terms only)
    Interaction part of the family ``{u_pr + w_h} U {t_n}``, where ``w_h`` is
    the host's response to the interior source and ``t_n`` the transmitted
    part of wave ``n``.
``"b"`` (identity-defined)
    Total host intensity minus the self and primary-cross terms of each
    ``w``-family member: ``I_pr + interaction({w_h} U {t_n})``.

Volume integrals over the host exclude a ball of radius
``eps_factor * R_h`` around the source and are repeated with half that radius
to measure the sensitivity to the excluded ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cluster import (AttributedFields, ClusterModel, assemble, bounding_radius,
                      random_cluster)
from .crosssec import check_bounds, cross_section_report, scs, sum_patterns
from .fields import (FieldSample, densities, intensity, split_densities,
                     split_intensity)
from .media import DomainError
from .quadrature import (SphericalGrid, default_sphere_grid, exact_sphere_grid,
                         integrate_ball_minus_hole, integrate_surface, sphere_grid)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
CONVENTIONS = ("a", "b")


@dataclass
class VerificationResult:
    """Outcome of one identity check.

    ``residual`` and ``relative_residual`` are derived from ``lhs`` and
    ``rhs`` on access. The relative residual is normalised by ``scale`` when
    given, otherwise by ``|rhs|``.
    """

    name: str
    lhs: complex
    rhs: complex
    tol: float
    exploratory: bool = False
    scale: float | None = None
    table: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    inconclusive: bool = False

    @property
    def residual(self) -> float:
        return float(abs(self.lhs - self.rhs))

    @property
    def relative_residual(self) -> float:
        ref = self.scale if self.scale is not None else abs(self.rhs)
        return self.residual / ref if ref > 0 else self.residual

    @property
    def status(self) -> str:
        if self.inconclusive:
            return INCONCLUSIVE
        return PASS if self.relative_residual <= self.tol else FAIL

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        def num(z):
            z = complex(z)
            return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}
        return {"name": self.name, "lhs": num(self.lhs), "rhs": num(self.rhs),
                "residual": self.residual, "relative_residual": self.relative_residual,
                "tol": self.tol, "status": self.status, "exploratory": self.exploratory,
                "table": self.table, "notes": self.notes}


def _interaction(fam: Sequence[FieldSample], dm) -> np.ndarray:
    if len(fam) < 2:
        return np.zeros((len(fam[0].value) if fam else 0, 3), dtype=complex)
    return split_intensity(fam, dm)[1]


def _interaction_kinetic(fam: Sequence[FieldSample], dm) -> np.ndarray:
    if len(fam) < 2:
        return np.zeros(len(fam[0].value))
    return split_densities(fam, dm)[1].kinetic


def _radial_flux(vec_fn, center, radius, grid):
    return complex(integrate_surface(
        lambda p, n: np.einsum("mi,mi->m", vec_fn(p), n), grid, center, radius))


# -- exterior flux ----------------------------------------------------------

def exterior_flux(af: AttributedFields, radius: float, grid: SphericalGrid | None = None,
                  interaction: bool = True, center=(0.0, 0.0, 0.0)) -> complex:
    """Complex flux of the exterior interaction (or total) intensity through a sphere."""
    center = np.asarray(center, dtype=float)
    if radius <= bounding_radius(af.model, center):
        raise DomainError(f"sphere of radius {radius} does not enclose the cluster")
    grid = grid or af.grid
    dm = af.exterior_dm
    if interaction:
        fn = lambda p: _interaction(af.exterior_family(p), dm)
    else:
        fn = lambda p: intensity(af.exterior_total(p), dm)
    return _radial_flux(fn, center, radius, grid)


def flux_preflight(af: AttributedFields, k0_radii=(20.0, 40.0), tol: float = 1e-8
                   ) -> VerificationResult:
    """Active flux of the total exterior field through two enclosing spheres."""
    k0 = af.exterior_dm.k.real
    radii = [max(x / k0, 1.01 * bounding_radius(af.model)) for x in k0_radii]
    f = [exterior_flux(af, r, interaction=False).real for r in radii]
    return VerificationResult("flux_preflight", f[1], f[0], tol,
                              table=[{"radius_m": r, "active_flux": v}
                                     for r, v in zip(radii, f)])


def _richardson(x, y):
    V = np.vander(np.asarray(x, dtype=float), len(x), increasing=True)
    return np.linalg.solve(V, np.asarray(y, dtype=complex))[0]


def verify_flux_limit(af: AttributedFields, k0_radii=(100.0, 200.0, 400.0),
                      tol: float = 1e-4, grid: SphericalGrid | None = None
                      ) -> VerificationResult:
    """``zeta_0`` times the flux of the exterior interaction intensity tends to ``sigma_c``.

    The complex flux is computed at each radius and extrapolated to infinite
    radius with a polynomial in ``1/R`` through all radii. The notes carry the
    correlation of the raw residuals with ``1/R``.
    """
    k0 = af.exterior_dm.k.real
    zeta0 = af.exterior_dm.zeta
    radii = np.asarray(k0_radii, dtype=float) / k0
    if af.N < 2:
        return VerificationResult("flux_limit", 0.0, 0.0, tol,
                                  notes={"reason": "single member: no interaction"})
    sigma_c = cross_section_report(af.patterns()).sigma_c
    fluxes = [zeta0 * exterior_flux(af, R, grid) for R in radii]
    res = [abs(f - sigma_c) for f in fluxes]
    limit = _richardson(1 / radii, fluxes) if len(radii) > 1 else fluxes[-1]
    corr = float(np.corrcoef(1 / radii, res)[0, 1]) if len(radii) > 2 else float("nan")
    table = [{"k0R": float(x), "zeta0_flux": {"re": f.real, "im": f.imag},
              "residual": r, "residual_over_sigma_c": r / abs(sigma_c)}
             for x, f, r in zip(k0_radii, fluxes, res)]
    return VerificationResult("flux_limit", limit, sigma_c, tol, table=table,
                              notes={"correlation_1_over_R": corr,
                                     "raw_residual_largest_radius": res[-1]})


# -- host interior ----------------------------------------------------------

def _w_family(af, p):
    return af.host_family(p)


def _a_family(af, p):
    fam = af.host_family(p)
    fam[-1] = fam[-1] + af.primary(p)
    return fam


def host_interaction_intensity(af: AttributedFields, p, convention: str) -> np.ndarray:
    dm = af.host_dm
    if convention == "a":
        return _interaction(_a_family(af, p), dm)
    if convention == "b":
        return intensity(af.primary(p), dm) + _interaction(_w_family(af, p), dm)
    raise DomainError(f"unknown convention {convention!r}")


def host_interaction_kinetic(af: AttributedFields, p, convention: str,
                             include_primary: bool = False) -> np.ndarray:
    dm = af.host_dm
    if convention == "a":
        return _interaction_kinetic(_a_family(af, p), dm)
    if convention == "b":
        k = _interaction_kinetic(_w_family(af, p), dm)
        if include_primary:
            k = k + densities(af.primary(p), dm).kinetic
        return k
    raise DomainError(f"unknown convention {convention!r}")


def host_surface_flux(af: AttributedFields, convention: str,
                      grid: SphericalGrid | None = None) -> complex:
    """Complex flux of the host interaction intensity out of the host surface."""
    grid = grid or default_sphere_grid(af.L)
    h = af.model.host
    return _radial_flux(lambda p: host_interaction_intensity(af, p, convention),
                        h.center, h.radius, grid)


def _volume_terms(af, eps, n_radial, angular) -> dict:
    """Interaction kinetic integrals over the host minus the ball ``B(a, eps)``.

    One pass over the volume nodes yields the convention-``a`` interaction
    term, the convention-``b`` interaction term and the primary self term.
    """
    dm = af.host_dm
    h = af.model.host

    def integrand(p):
        w = _w_family(af, p)
        pr = af.primary(p)
        kb = _interaction_kinetic(w, dm)
        a_fam = list(w)
        a_fam[-1] = a_fam[-1] + pr
        ka = _interaction_kinetic(a_fam, dm)
        return np.stack([ka, kb, densities(pr, dm).kinetic], axis=-1)

    v = integrate_ball_minus_hole(integrand, h.center, h.radius, af.model.source.position,
                                  eps, n_radial, angular)
    return {"a": float(v[0]), "b": float(v[1]), "primary": float(v[2])}


def _ball_flux(af, convention, eps, grid):
    a = af.model.source.position
    return _radial_flux(lambda p: host_interaction_intensity(af, p, convention),
                        a, eps, grid).real


def primary_ball_flux(af: AttributedFields, eps: float) -> float:
    """Closed-form active flux of the interior primary field through a ball about the source."""
    dm = af.host_dm
    A = af.model.source.amplitude
    kap = dm.k.imag
    return float(4 * math.pi * abs(A) ** 2 * math.exp(-2 * kap * eps)
                 * (1 / dm.zeta + dm.beta.imag / (dm.omega * abs(dm.beta) ** 2 * eps)))


@dataclass
class HostQuadrature:
    eps_factor: float = 1e-3
    n_radial: int = 48
    angular: SphericalGrid | None = None
    surface: SphericalGrid | None = None
    sensitivity_tol: float = 1e-6

    def grids(self, af):
        L = af.L
        ang = self.angular or sphere_grid(max(L + 8, 24), 2 * max(L + 8, 24))
        surf = self.surface or default_sphere_grid(L)
        return ang, surf


def verify_host_surface(af: AttributedFields, tol: float = 1e-5,
                        quad: HostQuadrature | None = None) -> list:
    """Host-surface energy relations under both interaction conventions.

    Returned results (``conv`` is ``a`` or ``b``):

    ``host_identity[conv]``
        Active interaction flux out of the host against
        ``4 pi |A|^2/zeta_h - 2 omega Im[beta_h/rho_h] int K_R``, the volume
        integral taken over the host minus the excluded ball. Non-exploratory
        for ``b``.
    ``host_green[conv]``
        The same flux against its exact balance over the host minus the ball:
        the active flux into the ball plus the loss integral of every term
        (the primary self term included for ``b``).
    ``surface_vs_far[conv]``
        ``sigma_c / zeta_0`` against the active host flux (the lossless
        reduction; for lossy hosts the same comparison with no other lossy
        members).
    ``interaction_vs_primary``
        ``sigma_c`` against ``4 pi |A|^2 zeta_0/zeta_h``.
    ``kinetic_form[printed|im]``
        ``sigma_c/zeta_0`` against the loss-weighted kinetic form, with the
        extra host kinetic term as printed or with its imaginary part.
    ``negativity_condition``
        Whether ``sigma_c < 0`` coincides with a negative active host flux
        (convention ``b``).
    """
    quad = quad or HostQuadrature()
    ang, surf = quad.grids(af)
    model = af.model
    hdm, edm = af.host_dm, af.exterior_dm
    omega, A = model.omega, model.source.amplitude
    eps = quad.eps_factor * model.host.radius
    loss = hdm.loss_factor
    sigma_c = cross_section_report(af.patterns()).sigma_c if af.N > 1 else 0.0
    sigma_pr = 4 * math.pi * abs(A) ** 2 / hdm.zeta
    vol = _volume_terms(af, eps, quad.n_radial, ang)
    vol_half = _volume_terms(af, eps / 2, quad.n_radial, ang)
    out = []
    fluxes = {}
    for conv in CONVENTIONS:
        flux = host_surface_flux(af, conv, surf)
        fluxes[conv] = flux
        v, vh = vol[conv], vol_half[conv]
        sens = abs(v - vh) / abs(v) if v != 0 else abs(vh)
        out.append(VerificationResult(
            f"host_identity[{conv}]", flux.real, sigma_pr - 2 * omega * loss * v, tol,
            exploratory=(conv == "a"), inconclusive=sens > quad.sensitivity_tol,
            notes={"volume_term": v, "volume_term_half_eps": vh, "eps_sensitivity": sens,
                   "eps_m": eps, "primary_term": sigma_pr}))
        # exact balance over the host minus the excluded ball
        vtot = v + (vol["primary"] if conv == "b" else 0.0)
        ball = _ball_flux(af, conv, eps, surf)
        out.append(VerificationResult(
            f"host_green[{conv}]", flux.real, ball - 2 * omega * loss * vtot, tol,
            exploratory=True, scale=max(abs(flux.real), sigma_pr),
            notes={"ball_flux": ball, "loss_volume": vtot,
                   "primary_ball_flux_closed": primary_ball_flux(af, eps)}))
        far = sigma_c / edm.zeta
        out.append(VerificationResult(
            f"surface_vs_far[{conv}]", flux.real, far, tol,
            exploratory=(conv == "b"), scale=max(abs(far), abs(flux.real)),
            notes={"imag_flux": flux.imag}))
    out.append(VerificationResult("interaction_vs_primary", sigma_c,
                                  sigma_pr * edm.zeta, tol, exploratory=True))
    base = sigma_pr - 2 * omega * loss * vol["b"]
    far = sigma_c / edm.zeta
    out.append(VerificationResult("kinetic_form[printed]", far, base + 2 * omega * vol["b"],
                                  tol, exploratory=True))
    # the host kinetic integral is real, so its imaginary part drops the extra term
    out.append(VerificationResult("kinetic_form[im]", far, base, tol, exploratory=True))
    consistent = (sigma_c < 0) == (fluxes["b"].real < 0)
    out.append(VerificationResult("negativity_condition", float(consistent), 1.0, 0.0,
                                  exploratory=True,
                                  notes={"sigma_c": sigma_c,
                                         "active_flux_b": fluxes["b"].real}))
    return out


# -- overall cross section --------------------------------------------------

def _require_lossless(af):
    if not af.host_dm.lossless:
        raise DomainError("identity requires a lossless host")


def excitation_at_scatterers(af: AttributedFields) -> np.ndarray:
    """Field at each ``b_n`` from everything except wave ``n`` itself."""
    B = af.model.positions
    if len(B) == 0:
        return np.zeros(0, complex)
    v = af.host_exterior(B).value.copy()
    k0 = af.exterior_dm.k
    for n in range(len(B)):
        for m, s in enumerate(af.point_sources):
            if m != n:
                d = float(np.linalg.norm(B[n] - s.position))
                v[n] += s.amplitude * np.exp(1j * k0 * d) / d
    return v


def scatterer_powers(af: AttributedFields) -> np.ndarray:
    """Net active power leaving a small ball around each point scatterer."""
    edm = af.exterior_dm
    A = af.strengths
    v = excitation_at_scatterers(af)
    return (4 * math.pi * np.abs(A) ** 2 / edm.zeta
            + 4 * math.pi / (af.model.omega * edm.rho) * np.imag(np.conj(A) * v))


def _host_power_terms(af):
    hdm = af.host_dm
    A = af.model.source.amplitude
    usc = af.host_scattered(af.model.source.position[None]).value[0]
    return hdm, A, usc


def verify_oscs(af: AttributedFields, tol: float = 1e-6) -> VerificationResult:
    """Overall cross section of a lossless cluster from the field at the source.

    ``sigma = zeta_0 [4 pi |A|^2/zeta_h - (4 pi/omega) Im[(A/beta_h) conj(u_h^sc(a))]]``.
    The relation presumes the point scatterers neither absorb nor generate
    power; their net powers are recorded in the notes.
    """
    _require_lossless(af)
    hdm, A, usc = _host_power_terms(af)
    edm = af.exterior_dm
    omega = af.model.omega
    sigma = scs(sum_patterns(af.patterns()))
    im = np.imag(A / hdm.beta * np.conj(usc))
    rhs = edm.zeta * (4 * math.pi * abs(A) ** 2 / hdm.zeta - 4 * math.pi / omega * im)
    printed = 4 * math.pi * abs(A) ** 2 * edm.zeta / hdm.zeta * (1 - hdm.zeta / omega * im)
    return VerificationResult("oscs", sigma, rhs, tol,
                              notes={"printed_form": printed,
                                     "scatterer_powers": scatterer_powers(af).tolist(),
                                     "u_sc_at_source": {"re": usc.real, "im": usc.imag}})


def verify_pointlike_overall(af: AttributedFields, tol: float = 1e-5) -> list:
    """Overall cross section as a sum of member powers (lossless host).

    Returns the energy-balance form, in which each point scatterer contributes
    ``4 pi |A_n|^2/zeta_0 + 4 pi/(omega rho_0) Im[conj(A_n) v_n]`` with ``v_n``
    the field at ``b_n`` from everything except its own wave, followed by the
    variant with the opposite sign on that term, ``v_n`` restricted to the
    host's exterior field, and the host bracket taken without the ``1/omega``
    factor (reported as exploratory).
    """
    _require_lossless(af)
    edm = af.exterior_dm
    hdm, A, usc = _host_power_terms(af)
    omega = af.model.omega
    sigma = scs(sum_patterns(af.patterns()))
    host = 4 * math.pi * abs(A) ** 2 / hdm.zeta - 4 * math.pi / omega * np.imag(
        A / hdm.beta * np.conj(usc))
    P = scatterer_powers(af)
    balance = VerificationResult("overall_power_balance", sigma / edm.zeta,
                                 float(P.sum()) + host, tol,
                                 notes={"scatterer_powers": P.tolist(), "host_power": host})
    An = af.strengths
    B = af.model.positions
    u0 = af.host_exterior(B).value if len(B) else np.zeros(0, complex)
    keep = np.abs(An) > 0
    terms = 4 * math.pi * np.abs(An[keep]) ** 2 * (
        1 / edm.zeta - np.imag(u0[keep] / An[keep]) / (omega * edm.rho))
    host_printed = 4 * math.pi * abs(A) ** 2 / hdm.zeta * (
        1 - np.imag(hdm.zeta / hdm.beta * A * np.conj(usc)))
    printed = VerificationResult("overall_power_balance[printed]", sigma / edm.zeta,
                                 float(terms.sum()) + host_printed, tol, exploratory=True)
    return [balance, printed]


# -- randomized inequality suite ---------------------------------------------

BOUND_KEYS = ("rc_upper", "rc_upper_min", "rc_lower_max", "n_bounds", "removal",
              "removal_smallest", "removal_largest", "removal_sharp", "removal_relaxed",
              "ratio_bound", "equality_fired")


def _tally(verdict, counts):
    for key in ("rc_upper", "rc_upper_min", "rc_lower_max"):
        counts[key] += not getattr(verdict, key)
    if verdict.n_bounds_applicable:
        counts["n_bounds_applicable"] += 1
        counts["n_bounds"] += not verdict.n_bounds
    counts["equality_fired"] += verdict.equality_rmax or verdict.equality_all
    N = verdict.N
    for rec in verdict.removal:
        counts["removal"] += not rec["ok"]
        if rec["n"] == 1:
            counts["removal_smallest"] += not rec["ok"]
        if rec["n"] == N:
            counts["removal_largest"] += not rec["ok"]
        counts["removal_sharp"] += not rec["sharp_ok"]
        counts["removal_relaxed"] += not rec["relaxed_ok"]
        if rec["ratio_applicable"]:
            counts["ratio_bound_applicable"] += 1
            counts["ratio_bound"] += not rec["ratio_ok"]


def bounds_suite(trials: int, seed: int = 0, identical_cases: Sequence[int] = (2, 3, 4, 5, 6)
                 ) -> dict:
    """Cross-section-ratio inequalities on seeded random clusters.

    Each trial draws a cluster with :func:`clusterflux.cluster.random_cluster`,
    computes its patterns on the smallest exact grid and tallies the
    violations of every inequality in :func:`clusterflux.crosssec.check_bounds`
    and :func:`clusterflux.crosssec.removal_contribution`. The equality
    diagnostics are also run on families of ``N`` identical patterns, where
    they must fire.
    """
    rng = np.random.default_rng(seed)
    counts = {k: 0 for k in BOUND_KEYS}
    counts.update(n_bounds_applicable=0, ratio_bound_applicable=0)
    worst = {}
    for _ in range(int(trials)):
        af = assemble(random_cluster(rng))
        pats = af.patterns(exact_sphere_grid(af.band_limit))
        verdict = check_bounds(cross_section_report(pats), patterns=pats)
        _tally(verdict, counts)
        for rec in verdict.removal:
            over = (rec["delta"] - rec["bound"]) / max(verdict.R_max, 1e-300)
            worst["removal"] = max(worst.get("removal", -math.inf), over)
    equality = []
    if identical_cases:
        af = assemble(random_cluster(rng, n_scatterers=1))
        base = af.patterns(exact_sphere_grid(af.band_limit))[-1]
        for N in identical_cases:
            rep = cross_section_report([base] * N)
            v = check_bounds(rep)
            equality.append({"N": N, "R_c": rep.R_c, "R_n": list(rep.ratios),
                             "equality_rmax": v.equality_rmax,
                             "equality_all": v.equality_all, "equality_rc": v.equality_rc})
    return {"trials": int(trials), "seed": int(seed), "violations": counts,
            "identical_pattern_cases": equality}


# -- frequency sweep ----------------------------------------------------------

def low_frequency_sweep(model: ClusterModel, omegas: Sequence[float],
                        convention: str = "a", tol: float = 1e-6,
                        assemble_kwargs: dict | None = None,
                        grid_fn: Callable | None = None) -> VerificationResult:
    """Trend of the host-surface interaction flux as the frequency decreases.

    For each frequency the table holds ``sigma_c/zeta_0``, the complex host
    flux for both conventions and the residual ``sigma_c/zeta_0 - Re(flux)``.
    The result passes when ``|Im flux|`` of ``convention`` decreases strictly
    along the (decreasing) frequencies and, for a lossless model, the residual
    stays below ``tol`` at every frequency.
    """
    om = np.asarray(omegas, dtype=float)
    if om.size < 4 or not np.all(np.diff(om) < 0):
        raise DomainError("need at least four strictly decreasing frequencies")
    if om[0] / om[-1] < 100 * (1 - 1e-12):
        raise DomainError("frequencies must span at least two decades")
    kw = assemble_kwargs or {}
    rows = []
    for w in om:
        af = assemble(model.with_omega(w), **kw)
        sigma_c = cross_section_report(af.patterns()).sigma_c if af.N > 1 else 0.0
        ratio = sigma_c / af.exterior_dm.zeta
        row = {"omega_rad_s": float(w), "sigma_c_over_zeta0": ratio}
        for conv in CONVENTIONS:
            f = host_surface_flux(af, conv, grid_fn(af) if grid_fn else None)
            row[f"flux_{conv}"] = {"re": f.real, "im": f.imag}
            row[f"residual_{conv}"] = ratio - f.real
        rows.append(row)
    im = np.array([abs(r[f"flux_{convention}"]["im"]) for r in rows])
    monotone = bool(np.all(np.diff(im) < 0))
    decades = np.log10(om[0] / om[-1])
    per_decade = float((im[0] / im[-1]) ** (1 / decades)) if im[-1] > 0 else float("inf")
    worst = max(abs(r[f"residual_{convention}"]) for r in rows)
    scale = max(abs(r["sigma_c_over_zeta0"]) for r in rows) or 1.0
    lossless = model.host.medium.lossless
    residual_ok = worst / scale <= tol
    verdict = monotone and (residual_ok or not lossless)
    return VerificationResult(
        f"low_frequency[{convention}]", float(verdict), 1.0, 0.0, table=rows,
        notes={"im_flux_monotone": monotone, "im_flux_reduction_per_decade": per_decade,
               "max_residual": worst, "max_relative_residual": worst / scale,
               "residual_within_tol": residual_ok, "lossless": lossless})


__all__ = ["VerificationResult", "HostQuadrature", "exterior_flux", "flux_preflight",
           "verify_flux_limit", "verify_host_surface", "host_surface_flux",
           "host_interaction_intensity", "host_interaction_kinetic", "primary_ball_flux",
           "verify_oscs", "verify_pointlike_overall", "scatterer_powers",
           "excitation_at_scatterers", "low_frequency_sweep", "bounds_suite", "PASS", "FAIL", "INCONCLUSIVE"]
