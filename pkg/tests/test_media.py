import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from clusterflux.media import DomainError, Medium, derive

positive = st.floats(1e-3, 1e3)


def test_lossless_reduction():
    dm = derive(Medium(rho=1.0, gamma=1.0), 2.0)
    assert dm.k == 2 + 0j
    assert dm.beta == 1
    assert dm.zeta == 1.0
    assert dm.lossless and dm.nu == 0.0


def test_unit_loss_parameter():
    # nu = omega gamma delta = 1
    dm = derive(Medium(rho=1.0, gamma=1.0, delta=1.0), 1.0)
    assert_allclose(dm.beta, (1 + 1j) / 2, rtol=1e-15)
    oracle = cmath.sqrt((1 + 1j) / 2)
    assert_allclose(dm.k, oracle, rtol=1e-15)
    assert_allclose(dm.k, 0.77689 + 0.32180j, atol=1e-5)


@given(positive, positive, st.floats(1e-6, 1e2), st.floats(1e-2, 1e2))
def test_lossy_wavenumber_in_upper_half_plane(rho, gamma, delta, omega):
    dm = derive(Medium(rho, gamma, delta), omega)
    assert dm.k.imag > 0
    assert dm.k.real > 0
    assert_allclose(dm.k**2, omega**2 * gamma * dm.beta, rtol=1e-12)
    assert dm.loss_factor > 0


@given(positive, positive, st.floats(1e-2, 1e2))
def test_lossless_admittance(rho, gamma, omega):
    dm = derive(Medium(rho, gamma), omega)
    assert_allclose(dm.zeta, math.sqrt(rho / gamma), rtol=1e-13)
    assert_allclose(dm.zeta, dm.zeta_lossless, rtol=1e-13)
    assert_allclose(dm.k, omega * math.sqrt(rho * gamma), rtol=1e-13)


def test_lossy_admittance_definition():
    dm = derive(Medium(1.3, 0.7, 0.4), 1.7)
    assert_allclose(dm.zeta, 1 / (dm.k / (dm.omega * dm.beta)).real, rtol=1e-14)


@pytest.mark.parametrize("args", [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 1.0, -0.1),
                                  (math.nan, 1.0, 0.0), (1.0, math.inf, 0.0)])
def test_medium_rejects_invalid_constants(args):
    with pytest.raises(DomainError):
        Medium(*args)


@pytest.mark.parametrize("omega", [0.0, -1.0, math.inf, math.nan])
def test_derive_rejects_bad_frequency(omega):
    with pytest.raises(DomainError):
        derive(Medium(1.0, 1.0), omega)


def test_medium_at_matches_derive():
    m = Medium(2.0, 0.5, 0.1)
    assert m.at(3.0) == derive(m, 3.0)
    assert np.isfinite(m.at(3.0).zeta)
