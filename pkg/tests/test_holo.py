import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from gammalab.banach import SpaceDescriptor
from gammalab.gamma import EstimatorConfig
from gammalab.holo import (DecayCertificate, DomainError, HoloFn, SectorDomain, StripDomain, cauchy_derivative,
                           disk_nesting_probe, gaussian_fn, kernel_halfwidth, lattice_gamma, lattice_truncation,
                           map_strip_sector, rational_fn, sech_fn, sinc_witness, strip_chain_constant,
                           strip_chain_probe, strip_poisson_kernels, theorem_probe, y_chain_probe)

R4 = SpaceDescriptor.lp(4, 2)
CFG = EstimatorConfig(samples=4000, seed=1)


def test_domains():
    s = StripDomain(1.0)
    assert s.contains(0.5j) and not s.contains(1.5j)
    sec = SectorDomain(1.0)
    assert sec.contains(1.0) and not sec.contains(0.0) and not sec.contains(-1.0)
    assert sec.distance_to_boundary(1.0) == pytest.approx(math.sin(1.0))
    with pytest.raises(ValueError):
        SectorDomain(4.0)
    with pytest.raises(ValueError):
        StripDomain(0.0)


def test_evaluation_outside_domain_raises():
    f = gaussian_fn([1.0], alpha=0.5)
    with pytest.raises(DomainError):
        f(np.array([1j]))
    with pytest.raises(DomainError):
        cauchy_derivative(f, 0.4j, 1, radius=0.2)


@pytest.mark.parametrize("make", [gaussian_fn, sech_fn, rational_fn])
def test_decay_certificates_hold(make):
    assert make(np.array([1.0, -2.0]), R4).check_decay(samples=256)


@pytest.mark.parametrize("make", [gaussian_fn, sech_fn, rational_fn])
def test_exact_and_cauchy_first_derivatives_agree(make):
    f = make(np.array([1.0, 2.0]), R4)
    z = np.array([0.3 + 0.1j, -1.2, 2.0 - 0.2j])
    np.testing.assert_allclose(f.derivative(z, 1), cauchy_derivative(f, z, 1), atol=1e-10)


def test_strip_sector_maps_invert():
    f = gaussian_fn(np.array([1.0, 1j]), R4, alpha=1.0)
    g = map_strip_sector(map_strip_sector(f, "strip_to_sector"), "sector_to_strip")
    z = np.array([0.2 + 0.3j, -2.0 - 0.5j])
    np.testing.assert_allclose(g(z), f(z), rtol=1e-13)
    with pytest.raises(ValueError):
        map_strip_sector(f, "sector_to_strip")


def test_lattice_truncation_and_gamma():
    f = gaussian_fn(np.array([1.0, 2.0]), SpaceDescriptor.lp(2, 2))
    N = lattice_truncation(f)
    assert f.decay.lattice_tail(N) <= 1e-8 * f.decay.C
    g = lattice_gamma(f, shift=0.25)
    n = np.arange(-N, N + 1) + 0.25
    assert g.value == pytest.approx(math.sqrt(5 * np.sum(np.exp(-2 * n ** 2))), rel=1e-12)
    with pytest.raises(ValueError):
        lattice_truncation(HoloFn.scalar(np.exp, [1.0], StripDomain(1.0)))


def test_poisson_kernels_positive_and_symmetric():
    x = np.linspace(-5, 5, 101)
    top, bottom = strip_poisson_kernels(x, 0.0, 1.0)
    assert np.all(top > 0) and np.allclose(top, bottom) and np.allclose(top, top[::-1])
    t2, b2 = strip_poisson_kernels(x, 0.3, 1.0)
    # above the centre line the top kernel carries more mass
    assert np.all(t2 > 0) and trapezoid(t2, x) > trapezoid(b2, x)
    assert kernel_halfwidth(1.0) > 2.0
    with pytest.raises(ValueError):
        strip_poisson_kernels(x, 1.0, 1.0)


# sinc witness -------------------------------------------------------------

def test_witness_gram_matches_plancherel_quadrature():
    w = sinc_witness(4, base=2)
    xg, wg = np.polynomial.legendre.leggauss(400)
    for y in (0.0, 0.07, -0.2):
        G, P = w.line_gram(y)
        c = w.frequencies
        ref = np.array([[np.sum(wg * np.exp(1j * (c[i] - c[j]) * xg + 4 * math.pi * y * xg)) for j in range(4)]
                        for i in range(4)])
        np.testing.assert_allclose(G, ref, atol=1e-12)
        assert np.array_equal(P, 2 * np.eye(4))


def test_witness_centre_value_and_warning():
    w = sinc_witness(3)
    assert np.allclose(w.phi(w.centers).diagonal(), 2.0)
    assert w.two_t == [6, 12, 24]
    with pytest.warns(RuntimeWarning):
        sinc_witness(3, base=3, mode="cotype")


def test_witness_l2_equals_hilbert_gamma():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 3))
    w = sinc_witness(5, coefficients=X, space=SpaceDescriptor.lp(2, 3))
    for y in (0.0, 0.1):
        assert w.line_lq(y, 2.0) == pytest.approx(w.line_gamma(y).value, rel=1e-8)


def test_witness_l4_matches_brute_force_grid():
    X = np.array([[1.0, 0.5], [-0.3, 1.0]])
    w = sinc_witness(2, coefficients=X, space=SpaceDescriptor.lp(4, 2))
    t = np.linspace(-4000, 4000, 4_000_001)
    v = np.sum(np.abs(w(t + 0.05j)) ** 4, axis=1)
    brute = (np.sum(v) * (t[1] - t[0])) ** 0.25
    assert w.line_lq(0.05, 4.0) == pytest.approx(brute, rel=1e-6)


def test_witness_linf_is_peak():
    w = sinc_witness(3, space=SpaceDescriptor.lp(math.inf, 3))
    assert w.line_lq(0.0, math.inf) == pytest.approx(2.0, rel=1e-6)


# theorem probes -------------------------------------------------------------

@pytest.mark.parametrize("kind,exponent", [("type", 2.0), ("cotype", 4.0)])
def test_strip_and_sector_geometries_agree(kind, exponent):
    f = gaussian_fn(np.array([1.0, 0.5j]), R4, alpha=1.0)
    g = map_strip_sector(f, "strip_to_sector")
    rs = theorem_probe(f, kind, exponent, "strip", 0.1, 0.4, CFG)
    rc = theorem_probe(g, kind, exponent, "sector", 0.1, 0.4, CFG)
    assert rc.ratio == pytest.approx(rs.ratio, rel=1e-9)
    assert rs.probe_id == f"holo.theorem.{kind}"


def test_witness_sector_equals_strip():
    w = sinc_witness(4, space=SpaceDescriptor.lp(4, 4))
    a = theorem_probe(w, "type", 2.0, "strip", config=CFG)
    b = theorem_probe(w, "type", 2.0, "sector", config=CFG)
    assert a.ratio == b.ratio


def test_theorem_probe_validation():
    f = gaussian_fn(np.array([1.0]), alpha=0.5)
    with pytest.raises(ValueError):
        theorem_probe(f, "type", 3.0)
    with pytest.raises(ValueError):
        theorem_probe(f, "cotype", 1.5)
    with pytest.raises(DomainError):
        theorem_probe(f, "type", 2.0, b=0.6)
    with pytest.raises(DomainError):
        theorem_probe(f, "type", 2.0, a=0.3, b=0.2)
    with pytest.raises(DomainError):
        theorem_probe(f, "type", 2.0, geometry="sector")


# chains ---------------------------------------------------------------------

def test_strip_chain_holds():
    f = gaussian_fn(np.array([1.0, -0.5]), R4, alpha=1.0)
    res = strip_chain_probe(f, 0.2, 0.5, config=CFG)
    assert res.holds, res.diagnostics
    C, r = strip_chain_constant(0.2, 0.5)
    assert res.constants["C1"] == C and r == pytest.approx(0.2997)


@pytest.mark.parametrize("Y", [("lp", 2.0), ("lp", 4.0), ("gamma",)])
def test_y_chain_holds(Y):
    f = sech_fn(np.array([1.0, 2.0]), R4, alpha=1.2)
    res = y_chain_probe(f, 0.1, 0.3, 0.5, 0.8, Y=Y, cells=160, levels=5, config=CFG)
    assert res.holds, res.diagnostics
    with pytest.raises(ValueError):
        y_chain_probe(f, 0.3, 0.1, 0.5, 0.8)


def test_disk_nesting_constants_finite():
    f = gaussian_fn(np.array([1.0, 1.0]), R4, alpha=2.0)
    res = disk_nesting_probe(f, 0.0, (0.3, 0.6, 0.9), k=1, ell=1, config=CFG)
    assert res.holds
    assert 0 < res.constants["C_left"] < math.inf and 0 < res.constants["C_right"] < math.inf
    with pytest.raises(ValueError):
        disk_nesting_probe(f, 0.0, (0.3, 0.6, 2.5))
