import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from clusterflux.cluster import ClusterModel, assemble
from clusterflux.crosssec import (FarFieldPattern, check_bounds, cross_section_report,
                                  interaction_cs, overall_primary_cs_closed,
                                  point_source_pattern, primary_interaction_cs_closed,
                                  removal_contribution, removal_table, scs, sum_patterns)
from clusterflux.fields import PointScatterer, PointSource, intensity
from clusterflux.host_sphere import HostSphere
from clusterflux.media import DomainError, Medium
from clusterflux.quadrature import default_sphere_grid, exact_sphere_grid, integrate_surface, \
    sphere_grid
from clusterflux.specfun import sph_bessel_j

GRID = sphere_grid(10, 20)
K0 = 2.0


def pattern(samples):
    return FarFieldPattern(GRID, samples, K0)


def test_constant_and_bare_source():
    assert_allclose(scs(pattern(np.full(GRID.size, 0.5 - 1j))), 4 * math.pi * 1.25 / K0**2,
                    rtol=1e-14)
    p = point_source_pattern(0.3 + 0.4j, [0.2, 0.1, -0.5], GRID, K0)
    assert_allclose(scs(p), 4 * math.pi * 0.25, rtol=1e-14)


def test_host_pattern_against_flux_pipeline():
    host = HostSphere(np.zeros(3), 1.0, Medium(1.5, 0.8))  # k0 R = 2
    af = assemble(ClusterModel(host, Medium(1.0, 1.0),
                               PointSource(np.array([0.3, -0.2, 0.4])), (), 2.0))
    sigma = scs(af.patterns()[0])
    R = 60 / K0
    g = sphere_grid(af.L + 40, 2 * af.L + 80)
    flux = integrate_surface(lambda p, n: np.einsum(
        "mi,mi->m", intensity(af.exterior_total(p), af.exterior_dm), n).real, g, np.zeros(3), R)
    assert_allclose(af.exterior_dm.zeta * flux, sigma, rtol=1e-8)


def test_two_identical_patterns():
    p = point_source_pattern(1.0, [0.1, 0.2, 0.3], GRID, K0)
    rep = cross_section_report([p, p])
    assert_allclose(rep.sigma_c, 2 * rep.sigma_j[0], rtol=1e-13)
    assert_allclose(rep.R_c, 0.5, rtol=1e-13)


def test_orthogonal_patterns_do_not_interact():
    x = GRID.nodes[:, 2]
    assert abs(interaction_cs([pattern(np.ones(GRID.size)), pattern(x)])) < 1e-14
    assert abs(interaction_cs([pattern(np.ones(GRID.size)), pattern(x)], double_sum=True)) < 1e-14


def test_source_scatterer_pair_closed_form():
    a, b = np.array([0.1, -0.3, 0.2]), np.array([1.9, 0.4, -0.1])
    A, A1 = 1.2 - 0.3j, 0.4 + 0.5j
    host = HostSphere(np.zeros(3), 1.0, Medium(1.0, 1.0))
    m = ClusterModel(host, Medium(1.0, 1.0), PointSource(a, A), (PointScatterer(b, A1),), K0)
    af = assemble(m)
    sigma_c = cross_section_report(af.patterns()).sigma_c
    closed = 8 * math.pi * (A * np.conj(A1)).real * sph_bessel_j(0, K0 * np.linalg.norm(a - b)).real
    assert_allclose(sigma_c, closed, rtol=1e-10)


def test_lemma_examples():
    pos = np.array([[0, 0, 0], [0, 0, math.pi / K0]])
    assert abs(primary_interaction_cs_closed([1, 1], pos, K0)) < 1e-14
    A = np.array([0.3 + 0.2j, -0.5 + 0.1j])
    pos = np.array([[0.2, 0, 0], [0, 1.3, 0.4]])
    d = np.linalg.norm(pos[0] - pos[1])
    assert_allclose(primary_interaction_cs_closed(A, pos, K0),
                    8 * math.pi * (A[0] * np.conj(A[1])).real * math.sin(K0 * d) / (K0 * d),
                    rtol=1e-14)
    with pytest.raises(DomainError):
        primary_interaction_cs_closed([1, 1], np.zeros((2, 3)), K0)


def test_random_cloud_closed_form_vs_quadrature(rng):
    A = rng.normal(size=5) + 1j * rng.normal(size=5)
    pos = rng.uniform(-2, 2, size=(5, 3))
    band = int(K0 * np.max(np.linalg.norm(pos, axis=-1))) + 20
    g = exact_sphere_grid(band)
    pats = [point_source_pattern(a, p, g, K0) for a, p in zip(A, pos)]
    closed = primary_interaction_cs_closed(A, pos, K0)
    assert_allclose(interaction_cs(pats), closed, rtol=1e-10,
                    atol=1e-10 * sum(scs(p) for p in pats))
    assert_allclose(interaction_cs(pats, double_sum=True), closed, rtol=1e-10,
                    atol=1e-10 * sum(scs(p) for p in pats))


def test_single_dense_and_sparse_limits():
    assert_allclose(overall_primary_cs_closed([0.7j], np.zeros((1, 3)), K0), 4 * math.pi * 0.49)
    M, A0 = 6, 0.8
    dense = 1e-3 / K0 * np.arange(M)[:, None] * np.array([[1.0, 0.0, 0.0]])
    assert_allclose(overall_primary_cs_closed(np.full(M, A0), dense, K0),
                    4 * math.pi * A0**2 * M**2, rtol=1e-4)
    sparse = 1e3 / K0 * np.arange(M)[:, None] * np.array([[0.0, 1.0, 0.0]])
    A = np.linspace(0.2, 1.0, M)
    direct = 4 * math.pi * np.sum(A**2)
    bound = 4 * math.pi * (A.sum() ** 2 - np.sum(A**2)) / 1e3
    assert abs(overall_primary_cs_closed(A, sparse, K0) - direct) <= bound


@pytest.mark.parametrize("N", [2, 3, 4, 7])
def test_identical_patterns_equality_case(N):
    p = point_source_pattern(1.0, [0.3, 0.0, 0.1], GRID, K0)
    rep = cross_section_report([p] * N)
    assert_allclose(rep.R_c, (N - 1) / N, rtol=1e-12)
    assert_allclose(rep.ratios, 1 / N**2, rtol=1e-12)
    v = check_bounds(rep)
    assert v.equality_rmax and v.equality_all and v.equality_rc
    assert v.violations == []


complex_patterns = st.integers(2, 6).flatmap(lambda n: st.lists(
    arrays(np.complex128, GRID.size, elements=st.complex_numbers(
        max_magnitude=10, allow_nan=False, allow_infinity=False)), min_size=n, max_size=n))


@given(complex_patterns)
def test_ratio_inequalities_hold_for_arbitrary_patterns(samples):
    pats = [pattern(s) for s in samples]
    if min(scs(p) for p in pats) <= 1e-12 or scs(sum_patterns(pats)) <= 1e-12:
        return
    v = check_bounds(cross_section_report(pats), patterns=pats)
    assert v.rc_upper and v.rc_upper_min and v.rc_lower_max
    if v.n_bounds_applicable:
        assert v.n_bounds
    for rec in v.removal:
        assert rec["sharp_ok"] and rec["relaxed_ok"]
        if rec["ratio_applicable"]:
            assert rec["ratio_ok"]


def test_condition_failure_marks_n_bounds_not_applicable():
    # equal members with no interaction give R_n = 1/2 > 1/N^2
    p1 = pattern(np.ones(GRID.size))
    p2 = pattern(GRID.nodes[:, 2] * math.sqrt(3))
    v = check_bounds(cross_section_report([p1, p2]))
    assert not v.n_bounds_applicable and v.n_bounds is None


def test_removal_of_one_of_two_identical_patterns():
    p = point_source_pattern(1.0, [0.2, 0.0, 0.0], GRID, K0)
    s1 = scs(p)
    rec = removal_contribution([p, p], 2)
    assert_allclose(rec["delta"], 3 * s1, rtol=1e-12)
    # stated bound (2N-3) sigma_N = sigma_1 is exceeded; the sharp bound is attained
    assert_allclose(rec["bound"], s1, rtol=1e-12)
    assert not rec["ok"]
    assert_allclose(rec["sharp_bound"], 3 * s1, rtol=1e-12)
    assert rec["sharp_ok"] and rec["relaxed_ok"]


def test_removing_zero_strength_member():
    p1 = point_source_pattern(1.0, [0.2, 0.0, 0.0], GRID, K0)
    p0 = point_source_pattern(0.0, [1.0, 0.0, 0.0], GRID, K0)
    rec = removal_contribution([p1, p0], 1)
    assert rec["delta"] == 0 and rec["ok"]


def test_random_four_scatterer_removal_table(rng):
    A = rng.normal(size=4) + 1j * rng.normal(size=4)
    pos = rng.uniform(-1, 1, size=(4, 3))
    pats = [point_source_pattern(a, p, exact_sphere_grid(12), K0) for a, p in zip(A, pos)]
    table = removal_table(pats)
    assert [r["n"] for r in table] == [1, 2, 3, 4]
    assert all(r["sharp_ok"] and r["relaxed_ok"] for r in table)


def test_pattern_validation():
    with pytest.raises(DomainError):
        FarFieldPattern(GRID, np.zeros(3), K0)
    other = FarFieldPattern(sphere_grid(4, 8), np.zeros(32), K0)
    with pytest.raises(DomainError):
        sum_patterns([pattern(np.zeros(GRID.size)), other])
    with pytest.raises(DomainError):
        interaction_cs([pattern(np.zeros(GRID.size))])
