import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from clusterflux.crosssec import scs
from clusterflux.fields import EXTERIOR, HOST, PointSource, intensity, primary_field
from clusterflux.host_sphere import (HostSphere, NotConvergedError, evaluate, expand_source,
                                     far_field, far_field_samples, solve_host)
from clusterflux.media import DomainError, Medium, derive
from clusterflux.quadrature import default_sphere_grid, integrate_surface, sphere_grid
from clusterflux.specfun import legendre_all, sph_h1_all, sph_jn_all

OMEGA = 2.0
WATER = Medium(1.0, 1.0)
EXT = derive(WATER, OMEGA)


def host(medium, radius=1.0, center=(0.0, 0.0, 0.0)):
    return HostSphere(np.array(center), radius, medium)


def surface_points(rng, center, R, m=64):
    v = rng.normal(size=(m, 3))
    return np.asarray(center) + R * v / np.linalg.norm(v, axis=-1)[:, None]


def test_centered_source_has_only_monopole_term():
    H = host(Medium(1.5, 0.8, 0.1))
    sol = solve_host(PointSource(np.zeros(3), 1.0), H, derive(H.medium, OMEGA), EXT)
    assert_allclose(sol.interior_coeffs[1:], 0.0, atol=1e-300)
    assert_allclose(sol.exterior_coeffs[1:], 0.0, atol=1e-300)
    assert sol.exterior_coeffs[0] != 0
    g = far_field_samples(sol, default_sphere_grid(10).nodes)
    assert np.max(np.abs(g)) / np.min(np.abs(g)) - 1 < 1e-10


def test_source_expansion_reconstruction(rng):
    k, d, L = 3.0, 1.0, 40
    axis = np.array([0.0, 0.0, 1.0])
    src = PointSource(d * axis, 1.0)
    dm = derive(Medium(1.0, 1.0), k)
    def series(r):
        outside = r > d
        c = expand_source(d, outside, k, L)
        radial = sph_h1_all(L, k * r) if outside else sph_jn_all(L, k * r)
        return np.sum(c * radial * legendre_all(L, 0.8))

    for r in (1.7, 0.4):
        exact = primary_field(src, dm, r * np.array([[0.6, 0.0, 0.8]])).value[0]
        assert_allclose(series(r), exact, rtol=1e-10)
    # the r_< / r_> roles swap at r = d; both branches meet continuously
    above, below = series(d + 1e-6), series(d - 1e-6)
    assert abs(above - below) < 1e-4 * abs(above)


def test_matched_media_has_no_response():
    H = host(WATER)
    a = np.array([0.3, -0.2, 0.1])
    src = PointSource(a, 1.0 - 0.5j)
    sol = solve_host(src, H, EXT, EXT)
    inner = np.array([[0.1, 0.1, 0.1], [-0.5, 0.2, 0.4]])
    prim_in = primary_field(src, EXT, inner).value
    assert np.max(np.abs(evaluate(sol, inner, HOST).value)) <= 1e-12 * np.max(np.abs(prim_in))
    outer = np.array([[1.5, 0.0, 0.0], [0.0, 2.0, -1.0]])
    assert_allclose(evaluate(sol, outer, EXTERIOR).value, primary_field(src, EXT, outer).value,
                    rtol=1e-12)


@pytest.mark.parametrize("inside", [True, False])
def test_transmission_conditions_lossy_host(inside, rng):
    R = 2.0  # k0 R = 4
    H = host(Medium(1.4, 0.7, 0.15), R, center=(0.1, -0.2, 0.05))
    hdm = derive(H.medium, OMEGA)
    pos = H.center + (np.array([0.5, 0.3, -0.6]) if inside else np.array([2.9, 0.4, 0.2]))
    src = PointSource(pos, 0.8 + 0.3j)
    sol = solve_host(src, H, hdm, EXT)
    assert sol.converged
    pts = surface_points(rng, H.center, R)
    normals = (pts - H.center) / R
    inn = evaluate(sol, pts, HOST)
    out = evaluate(sol, pts, EXTERIOR)
    if inside:
        inn = inn + primary_field(src, hdm, pts, HOST)
    else:
        out = out + primary_field(src, EXT, pts)
    scale = np.max(np.abs(out.value))
    assert np.max(np.abs(inn.value - out.value)) < 1e-9 * scale
    dn_in, dn_out = inn.radial_derivative(normals), out.radial_derivative(normals)
    lhs = hdm.beta / EXT.rho * dn_out
    assert np.max(np.abs(lhs - dn_in)) < 1e-9 * np.max(np.abs(dn_in))


def test_gradient_matches_finite_differences(rng):
    H = host(Medium(1.6, 0.5, 0.05), 1.0)
    hdm = derive(H.medium, OMEGA)
    sol = solve_host(PointSource(np.array([0.2, 0.1, -0.3]), 1.0), H, hdm, EXT)
    pts = np.array([[0.5, 0.2, 0.1], [1.6, -0.4, 0.7]])
    f = evaluate(sol, pts)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (evaluate(sol, pts + e).value - evaluate(sol, pts - e).value) / (2 * h)
        assert_allclose(f.gradient[:, i], fd, rtol=1e-6)


def test_matched_far_field_pattern():
    a = np.array([0.2, -0.4, 0.1])
    A = 0.9 + 0.2j
    sol = solve_host(PointSource(a, A), host(WATER), EXT, EXT)
    g = default_sphere_grid(20)
    k0 = EXT.k.real
    assert_allclose(far_field_samples(sol, g.nodes), 1j * k0 * A * np.exp(-1j * k0 * g.nodes @ a),
                    rtol=1e-12)
    assert_allclose(scs(far_field(sol, g)), 4 * math.pi * abs(A) ** 2, rtol=1e-12)


@pytest.mark.parametrize("center", [(0.0, 0.0, 0.0), (0.3, -0.1, 0.2)])
def test_cross_section_equals_far_flux(center):
    H = host(Medium(1.5, 0.8), 1.0, center)
    hdm = derive(H.medium, OMEGA)
    src = PointSource(H.center + np.array([0.3, 0.2, -0.4]), 1.0)
    sol = solve_host(src, H, hdm, EXT)
    sigma = scs(far_field(sol, default_sphere_grid(sol.L)))
    radius = 50 / EXT.k.real
    grid = sphere_grid(sol.L + 30, 2 * sol.L + 60)
    flux = integrate_surface(
        lambda p, n: np.einsum("mi,mi->m", intensity(evaluate(sol, p, EXTERIOR), EXT), n).real,
        grid, np.zeros(3), radius)
    assert_allclose(EXT.zeta * flux, sigma, rtol=1e-8)


def test_truncation_tail_and_refusal():
    H = host(Medium(3.0, 2.0))
    hdm = derive(H.medium, OMEGA)
    sol = solve_host(PointSource(np.array([0.4, 0.0, 0.3]), 1.0), H, hdm, EXT)
    assert sol.tail < 1e-10
    short = solve_host(PointSource(np.array([0.4, 0.0, 0.3]), 1.0), H, hdm, EXT, L=4)
    assert not short.converged
    with pytest.raises(NotConvergedError):
        evaluate(short, np.array([[2.0, 0, 0]]))
    capped = solve_host(PointSource(np.array([0.4, 0.0, 0.3]), 1.0), H, hdm, EXT, L_max=5)
    assert capped.L == 5 and not capped.converged


def test_source_on_surface_rejected():
    with pytest.raises(DomainError):
        solve_host(PointSource(np.array([1.0, 0, 0])), host(WATER), EXT, EXT)


def test_scaled_solution_is_linear():
    H = host(Medium(1.5, 0.8, 0.1))
    hdm = derive(H.medium, OMEGA)
    one = solve_host(PointSource(np.array([0.1, 0.2, 0.3]), 1.0), H, hdm, EXT)
    two = solve_host(PointSource(np.array([0.1, 0.2, 0.3]), 2 - 1j), H, hdm, EXT, L=one.L)
    assert_allclose(one.scaled(2 - 1j).exterior_coeffs, two.exterior_coeffs, rtol=1e-13)
