import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gammalab.banach import SpaceDescriptor
from gammalab.calculus import SectorialOperator, cycle_laplacian, laplacian1d
from gammalab.interp import (BesovConfig, besov_chain_probe, besov_test_data, fractional_domain_norm,
                             gamma_constant, interp_chain_probe, interp_grid, real_interp_norm, periodic_laplacian)


def test_gamma_constant_values():
    assert gamma_constant(0.5) == pytest.approx(1.0)
    assert gamma_constant(0.25) == pytest.approx(math.gamma(1.5) * math.gamma(0.5))


def test_sup_norm_closed_form():
    # sup_s s^{1-theta}/(1+s) = theta^theta (1-theta)^{1-theta}
    theta, lam = 0.3, 4.0
    J = real_interp_norm(np.diag([lam]), [1.0], theta, math.inf, points=2048).value
    assert J == pytest.approx(lam ** theta * theta ** theta * (1 - theta) ** (1 - theta), rel=1e-3)


@settings(max_examples=10, deadline=None)
@given(theta=st.floats(0.15, 0.85), lam=st.floats(0.1, 100.0))
def test_closed_form_over_theta_and_scale(theta, lam):
    J = real_interp_norm(np.diag([lam, 1.0]), [1.0, 0.0], theta, 2.0).value
    assert J == pytest.approx(lam ** theta * math.sqrt(gamma_constant(theta)), rel=1e-4)


def test_norm_is_homogeneous():
    A = laplacian1d(6)
    x = np.random.default_rng(0).standard_normal(6)
    a = real_interp_norm(A, x, 0.4, 3.0).value
    assert real_interp_norm(A, -2.5 * x, 0.4, 3.0).value == pytest.approx(2.5 * a, rel=1e-10)
    assert real_interp_norm(A, np.zeros(6), 0.4, 3.0).value == 0.0


def test_non_invertible_adds_base_norm():
    op = SectorialOperator.certify(cycle_laplacian(6))
    x = np.ones(6)
    n = real_interp_norm(op, x, 0.5, 2.0)
    assert not n.invertible and n.value == pytest.approx(n.integral + math.sqrt(6))
    assert fractional_domain_norm(op, x, 0.5) == pytest.approx(float(np.linalg.norm(x)) * 2)


def test_fractional_domain_norm_of_eigenvector():
    lam, V = np.linalg.eigh(laplacian1d(8))
    assert fractional_domain_norm(laplacian1d(8), V[:, 3], 0.25) == pytest.approx(lam[3] ** 0.25, rel=1e-10)


def test_grid_covers_decay():
    op = SectorialOperator.certify(np.diag([2.0, 50.0]))
    g = interp_grid(op, 0.5, 2.0)
    t = g.points()
    # t^{-1/2} w(t lambda) squared is about 1e-12 at both ends
    assert t[0] * 50 < 2e-12 and t[-1] * 2 > 5e11
    with pytest.raises(ValueError):
        real_interp_norm(np.diag([1.0]), [1.0], 1.2, 2.0)


def test_hilbert_chain_constants_are_exact():
    # for self-adjoint A, J_2(x) = Gamma(2-2theta)^{1/2} Gamma(2 theta)^{1/2} ||A^theta x||
    c = math.sqrt(gamma_constant(0.5 + 0.2))
    res = interp_chain_probe(laplacian1d(8), 0.7, 2.0, 2.0, trials=8, seed=1)
    assert res.quantities["max_upper"] == pytest.approx(c, rel=1e-6)
    assert res.quantities["max_lower"] == pytest.approx(1 / c, rel=1e-6)
    assert res.probe_id == "interp.chain" and res.holds


def test_lp_chain_records_declared_exponents():
    A = laplacian1d(8)
    res = interp_chain_probe(A, 0.5, 2.0, 4.0, trials=6, seed=2, space=SpaceDescriptor.lp(4, 8))
    assert res.params["declared"] == {"type": 2.0, "cotype": 4.0}
    assert np.all(np.isfinite(res.quantities["upper"]))


def test_periodic_laplacian_multiplier():
    N = 16
    L = periodic_laplacian(N)
    k = np.arange(N)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(L)), np.sort(4 * N ** 2 * np.sin(np.pi * k / N) ** 2 + 1),
                               rtol=1e-12)
    np.testing.assert_allclose(L, L.T, atol=1e-12)


def test_besov_config_validation():
    with pytest.raises(ValueError):
        BesovConfig(4.0, 24)
    with pytest.raises(ValueError):
        BesovConfig(1.0, 16)
    with pytest.raises(ValueError):
        BesovConfig(4.0, 16, theta=1.0)
    assert BesovConfig(4.0, 16).space.dim == 16


def test_besov_data_shapes_and_seeds():
    a = besov_test_data(32, 5, np.random.default_rng(0))
    b = besov_test_data(32, 5, np.random.default_rng(0))
    assert a.shape == (32, 5) and np.array_equal(a, b)


def test_besov_microscopic_and_small_r():
    res = besov_chain_probe(BesovConfig(1.5, 16, microscopic=3.0), trials=4, seed=0)
    assert res.params["p"] == 1.5 and res.params["q"] == 2.0
    assert res.quantities["J_microscopic"].shape == (4,)
    sw = besov_chain_probe(BesovConfig(1.5, 16), trials=4, seed=0, swapped=True)
    assert sw.probe_id == "interp.besov.swapped" and (sw.params["p"], sw.params["q"]) == (2.0, 1.5)
