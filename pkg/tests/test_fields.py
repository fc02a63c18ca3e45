import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clusterflux.fields import (FieldSample, PointScatterer, PointSource, cross_densities,
                                cross_intensity, densities, intensity, primary_field,
                                split_densities, split_intensity, superpose)
from clusterflux.media import DomainError, Medium, derive
from clusterflux.specfun import SingularityError

LOSSLESS = derive(Medium(1.0, 1.0), 2.0)
LOSSY = derive(Medium(1.3, 0.9, 0.2), 1.5)


def random_sample(rng, m=7):
    return FieldSample(rng.normal(size=m) + 1j * rng.normal(size=m),
                       rng.normal(size=(m, 3)) + 1j * rng.normal(size=(m, 3)))


def test_primary_field_value():
    u = primary_field(PointSource(np.zeros(3), 1.0), LOSSLESS, np.array([[0.0, 0.0, 1.0]]))
    assert_allclose(u.value, np.exp(2j), rtol=1e-15)


@pytest.mark.parametrize("dm", [LOSSLESS, LOSSY])
def test_primary_gradient_finite_differences(dm, rng):
    src = PointSource(np.array([0.1, -0.2, 0.3]), 0.7 + 0.4j)
    p = rng.normal(size=(5, 3))
    u = primary_field(src, dm, p)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (primary_field(src, dm, p + e).value - primary_field(src, dm, p - e).value) / (2 * h)
        assert_allclose(u.gradient[:, i], fd, rtol=1e-6, atol=1e-9)


def test_radial_active_intensity_of_primary_field():
    a = np.array([0.2, 0.1, -0.4])
    A = 1.3 - 0.6j
    n = np.array([[0.6, 0.0, 0.8], [0.0, -1.0, 0.0]])
    for dm in (LOSSLESS, LOSSY):
        r = 0.9
        u = primary_field(PointSource(a, A), dm, a + r * n)
        Ir = np.einsum("mi,mi->m", intensity(u, dm), n).real
        decay = np.exp(-2 * dm.k.imag * r)
        near = dm.beta.imag / (dm.omega * abs(dm.beta) ** 2 * r)
        assert_allclose(Ir, abs(A) ** 2 * decay / r**2 * (1 / dm.zeta + near), rtol=1e-13)
        if dm.lossless:
            assert_allclose(Ir, abs(A) ** 2 / (r**2 * dm.zeta), rtol=1e-13)


def test_lossy_field_decays_faster_than_inverse_distance():
    src = PointSource(np.zeros(3), 1.0)
    pts = np.array([[1.0, 0, 0], [2.0, 0, 0]])
    u = np.abs(primary_field(src, LOSSY, pts).value) * np.array([1.0, 2.0])
    assert u[1] < u[0]


def test_singularity_at_source():
    with pytest.raises(SingularityError):
        primary_field(PointSource(np.zeros(3)), LOSSLESS, np.zeros((1, 3)))
    with pytest.raises(DomainError):
        PointSource(np.zeros(3), complex("nan"))


def test_real_field_is_purely_reactive():
    u = FieldSample(np.array([1.5, -0.3]), np.array([[0.2, 1.0, -3.0], [1.0, 0.0, 0.5]]))
    I = intensity(u, LOSSLESS)
    assert_allclose(I.real, 0.0, atol=1e-16)
    assert np.any(I.imag != 0)


def test_plane_wave_intensity():
    k, om, rho = LOSSLESS.k.real, LOSSLESS.omega, LOSSLESS.rho
    x = np.linspace(-1, 1, 5)
    u = np.exp(1j * k * x)
    grad = np.zeros((5, 3), complex)
    grad[:, 0] = 1j * k * u
    I = intensity(FieldSample(u, grad), LOSSLESS)
    assert_allclose(I, np.tile([k / (om * rho), 0, 0], (5, 1)), atol=1e-15)


def test_single_field_has_no_interaction(rng):
    u = random_sample(rng)
    direct, inter = split_intensity([u], LOSSY)
    assert_allclose(direct, intensity(u, LOSSY))
    assert np.all(inter == 0)
    dd, di = split_densities([u], LOSSY)
    assert np.all(di.kinetic == 0) and np.all(di.potential == 0)


def test_two_equal_fields(rng):
    # |2u|^2-type expansion: total = 4 I(u), direct = 2 I(u), so interaction = direct
    u = random_sample(rng)
    direct, inter = split_intensity([u, u], LOSSY)
    assert_allclose(inter, direct, rtol=1e-14)
    assert_allclose(inter, 2 * intensity(u, LOSSY), rtol=1e-14)


def test_three_fields_split_is_exact(rng):
    fam = [random_sample(rng) for _ in range(3)]
    direct, inter = split_intensity(fam, LOSSY)
    total = intensity(superpose(fam), LOSSY)
    assert_allclose(direct + inter, total, rtol=1e-12)
    pair = sum(cross_intensity(fam[i], fam[j], LOSSY) for i in range(3) for j in range(i))
    assert_allclose(inter, pair, rtol=1e-12, atol=1e-14)


def test_density_examples(rng):
    c = 0.7 - 1.1j
    u = FieldSample(np.full(3, c), np.zeros((3, 3), complex))
    d = densities(u, LOSSY)
    assert np.all(d.kinetic == 0)
    assert_allclose(d.potential, LOSSY.gamma * abs(c) ** 2 / 2)
    fam = [random_sample(rng), random_sample(rng)]
    direct, inter = split_densities(fam, LOSSY)
    total = densities(superpose(fam), LOSSY)
    assert_allclose(direct.kinetic + inter.kinetic, total.kinetic, rtol=1e-12)
    assert_allclose(direct.potential + inter.potential, total.potential, rtol=1e-12)
    assert_allclose(inter.kinetic, cross_densities(*fam, LOSSY).kinetic, rtol=1e-12)
    assert_allclose(total.lagrangian, total.kinetic - total.potential)


@given(st.floats(0.3, 3.0), st.floats(0.01, 1.0))
def test_divergence_of_active_intensity_is_loss(r, delta):
    # Re div I = -2 omega Im[beta/rho] K for a source-free region
    dm = derive(Medium(1.1, 0.9, delta), 1.7)
    src = PointSource(np.zeros(3), 1.0)
    p = np.array([[r, 0.2, -0.1]])
    h = 1e-5
    div = 0.0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        Ip = intensity(primary_field(src, dm, p + e), dm)[0, i]
        Im = intensity(primary_field(src, dm, p - e), dm)[0, i]
        div += (Ip - Im) / (2 * h)
    K = densities(primary_field(src, dm, p), dm).kinetic[0]
    assert_allclose(div.real, -2 * dm.omega * dm.loss_factor * K, rtol=1e-5)


def test_point_scatterer_helpers():
    s = PointScatterer([1.0, 2.0, 3.0], 0.5, 0.1 + 0.2j)
    t = s.with_strength(2j)
    assert t.strength == 2j and t.monopole_coefficient == s.monopole_coefficient
    assert s.as_source().amplitude == 0.5
