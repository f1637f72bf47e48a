import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, fractional_matrix_power

from gammalab.banach import SpaceDescriptor
from gammalab.calculus import (ContourError, GridTooNarrowError, NotDiffusionError, NotSectorialError,
                               ResolventError, SectorialOperator, calibration_integral, check_diffusion,
                               contour_apply, cycle_laplacian, default_log_grid, diag_operator, diagonal_oracle,
                               diffusion_extend_probe, fractional_power, g_trace, kernel_projection, laplacian1d,
                               load_operator_csv, lps_probe, parse_operator, parse_symbol, rational_symbol,
                               resolvent, save_operator_csv, symbol_apply, symbol_g, symbol_q, symbol_v,
                               symbol_w)
from gammalab.gamma import MeasuredGrid


# operators ------------------------------------------------------------------

def test_laplacian_spectrum():
    n = 10
    lam = np.sort(np.linalg.eigvalsh(laplacian1d(n)))
    k = np.arange(1, n + 1)
    np.testing.assert_allclose(lam, 4 * (n + 1) ** 2 * np.sin(k * np.pi / (2 * (n + 1))) ** 2)


def test_certificate_of_normal_matrix():
    op = SectorialOperator.certify(np.diag([1.0, 3.0, 10.0]))
    assert op.angle == 0.0 and op.shift == 0.0
    # ||z (z - A)^{-1}|| <= 1 / sin(sigma) off the sector, sigma = pi/2 here
    assert op.constant == pytest.approx(1.0, rel=1e-8)


def test_singular_input_is_shifted():
    op = SectorialOperator.certify(cycle_laplacian(6))
    assert op.shift == 1.0
    np.testing.assert_allclose(op.effective, cycle_laplacian(6) + np.eye(6))
    with pytest.raises(NotSectorialError):
        SectorialOperator.certify(np.diag([0.0, 1.0, -1.0]), shift=0.0)


def test_not_sectorial():
    with pytest.raises(NotSectorialError):
        SectorialOperator.certify(np.diag([1.0, -1.0]))
    with pytest.raises(NotSectorialError):
        SectorialOperator.certify(np.diag([1.0, 1j]), sigma=1.0)


def test_resolvent():
    A = np.diag([1.0, 2.0])
    np.testing.assert_allclose(resolvent(A, -1.0), np.diag([-0.5, -1 / 3]))
    with pytest.raises(ResolventError):
        resolvent(A, 1.0)


@pytest.mark.parametrize("text,expect", [
    ("laplacian1d:4", laplacian1d(4)), ("laplacian1d(4)", laplacian1d(4)),
    ("cycle-laplacian:5", cycle_laplacian(5)), ("diag:1,2,5", np.diag([1, 2, 5])),
])
def test_parse_operator(text, expect):
    np.testing.assert_allclose(parse_operator(text), expect)


def test_parse_operator_rejects():
    for bad in ("laplacian", "heat:3", "laplacian1d:x"):
        with pytest.raises(ValueError):
            parse_operator(bad)


def test_operator_csv_round_trip(tmp_path):
    A = np.array([[1 + 2j, 0.5], [-0.25j, 3.0]])
    save_operator_csv(A, tmp_path / "a.csv")
    assert np.array_equal(load_operator_csv(tmp_path / "a.csv"), A)
    assert np.array_equal(parse_operator(f"csv:{tmp_path / 'a.csv'}"), A)


def test_kron_keeps_spectrum():
    op = SectorialOperator.certify(laplacian1d(3)).kron(2)
    assert op.n == 6
    np.testing.assert_allclose(np.sort(op.eigenvalues().real),
                               np.sort(np.repeat(np.linalg.eigvalsh(laplacian1d(3)), 2)))


# symbols --------------------------------------------------------------------

@pytest.mark.parametrize("f", [symbol_q(), symbol_v(0.25), symbol_v(0.75), symbol_g(0.5), symbol_g(1.0)])
def test_decay_certificates(f):
    assert f.is_hinf0 and f.check_certificate()


def test_symbol_values():
    assert symbol_g(0.5)(1.0) == pytest.approx(math.exp(-1))
    assert symbol_q()(1.0) == pytest.approx(0.25)
    assert not symbol_w().is_hinf0 and symbol_w().at_inf == 1.0
    assert symbol_g(0.5).angle == pytest.approx(math.pi)
    assert symbol_g(0.75).angle == pytest.approx(2 * math.pi / 3)


def test_symbol_product_and_rational():
    p = symbol_q() * symbol_v(0.5)
    assert p(2.0) == pytest.approx(symbol_q()(2.0) * symbol_v(0.5)(2.0))
    r = rational_symbol([1, 0], [1, 2, 1])
    assert r.eps == 1.0 and r(3.0) == pytest.approx(symbol_q()(3.0))
    w = rational_symbol([1, 0], [1, 1])
    assert w.eps is None and w.at_inf == 1.0
    with pytest.raises(ValueError):
        rational_symbol([1], [1, -1])
    with pytest.raises(ValueError):
        rational_symbol([1, 0, 0], [1, 1])


def test_parse_symbol():
    assert parse_symbol("v:0.25").params["theta"] == 0.25
    assert parse_symbol("g:0.5").params["alpha"] == 0.5
    with pytest.raises(ValueError):
        parse_symbol("sinc")
    with pytest.raises(ValueError):
        symbol_v(1.5)


# Dunford calculus -------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 6))
def test_calculus_is_multiplicative(seed, n):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.2, 20, n) * np.exp(1j * rng.uniform(-1, 1, n))
    V = np.eye(n) + 0.2 * rng.standard_normal((n, n))
    op = SectorialOperator.certify(V @ np.diag(lam) @ np.linalg.inv(V))
    q, v = symbol_q(), symbol_v(0.5)
    lhs = symbol_apply(op, q * v)
    rhs = symbol_apply(op, q) @ symbol_apply(op, v)
    assert np.abs(lhs - rhs).max() <= 1e-8 * max(1.0, np.abs(rhs).max())


def test_scales_match_individual_calls():
    A = laplacian1d(6)
    x = np.arange(1.0, 7.0)
    ts = [1e-3, 0.1, 10.0]
    V = contour_apply(A, symbol_q(), x, ts)
    for i, t in enumerate(ts):
        np.testing.assert_allclose(V[i], symbol_apply(A, symbol_q(), scale=t) @ x, atol=1e-12)


def test_g_half_is_poisson_derivative():
    A = np.diag([0.25, 1.0, 4.0])
    lam = np.diag(A)
    np.testing.assert_allclose(np.diag(symbol_apply(A, symbol_g(0.5))).real,
                               np.sqrt(lam) * np.exp(-np.sqrt(lam)), atol=1e-10)


def test_contour_angle_must_separate():
    A = np.diag([1.0, 1.0 + 1.0j])
    with pytest.raises(ContourError):
        symbol_apply(A, symbol_q(), nu=0.2)
    with pytest.raises(ContourError):
        symbol_apply(np.diag([1.0, 2.0]), symbol_g(0.9), nu=1.9)


def test_diagonal_oracle_diag():
    np.testing.assert_allclose(diagonal_oracle(np.diag([2.0, 3.0]), symbol_q()), np.diag([2 / 9, 3 / 16]))


@pytest.mark.parametrize("theta", [0.3, 0.5, 1.0, 1.7])
def test_fractional_power_matches_scipy(theta):
    A = laplacian1d(5) / 36 + 0.3 * np.triu(np.ones((5, 5)), 1)
    ref = fractional_matrix_power(A, theta)
    for method in ("eig", "integral"):
        got = fractional_power(A, theta, method)
        assert np.abs(got - ref).max() <= 1e-9 * np.abs(ref).max()


def test_fractional_power_jordan_block_uses_integral():
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    got = fractional_power(A, 0.5)
    np.testing.assert_allclose(got @ got, A, atol=1e-10)
    with pytest.raises(ValueError):
        fractional_power(np.diag([1.0, -1.0]), 0.5)


# traces -----------------------------------------------------------------------

def test_default_grid_brackets_decay():
    op = SectorialOperator.certify(laplacian1d(8))
    g = default_log_grid(op, symbol_q())
    t = g.points()
    lmin, lmax = op.spectral_bounds()
    assert abs(symbol_q()(t[0] * lmax)) < 1e-7 and abs(symbol_q()(t[-1] * lmin)) < 1e-7
    with pytest.raises(ValueError):
        default_log_grid(op, symbol_w())


def test_narrow_grid_is_rejected():
    with pytest.raises(GridTooNarrowError):
        g_trace(laplacian1d(4), symbol_q(), np.ones(4), MeasuredGrid.halfline(1e-3, 1e-1, 32))
    with pytest.raises(ValueError):
        g_trace(laplacian1d(4), symbol_q(), np.ones(4), MeasuredGrid.uniform(0, 1, 8))


def test_lps_zero_vector_and_shapes():
    sp = SpaceDescriptor.lp(4, 4)
    res = lps_probe(laplacian1d(4), symbol_q(), np.zeros(4), sp)
    assert res.lhs == 0.0 and res.rhs == 0.0
    with pytest.raises(ValueError):
        lps_probe(laplacian1d(4), symbol_q(), np.ones(4), SpaceDescriptor.lp(4, 3))


@pytest.mark.parametrize("theta", [0.25, 0.5])
def test_calibration_of_v(theta):
    # int_0^inf t^{2-2 theta} (1+t)^{-2} dt/t = Gamma(2-2 theta) Gamma(2 theta)
    assert calibration_integral(symbol_v(theta)) == pytest.approx(
        math.gamma(2 - 2 * theta) * math.gamma(2 * theta), rel=1e-10)


# diffusion --------------------------------------------------------------------

def test_check_diffusion():
    w = check_diffusion(cycle_laplacian(6))
    assert w["min_entry"] >= -1e-12 and w["max_row_sum"] <= 1 + 1e-12
    with pytest.raises(NotDiffusionError):
        check_diffusion(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(NotDiffusionError):
        check_diffusion(-0.5 * np.eye(2))


def test_kernel_projection_of_cycle():
    P = kernel_projection(cycle_laplacian(5))
    np.testing.assert_allclose(P, np.full((5, 5), 0.2), atol=1e-12)
    assert kernel_projection(laplacian1d(3)) is None


def test_diffusion_single_state_reduces_to_lps():
    Q = np.array([[2.0]])
    sp = SpaceDescriptor.lp(4, 1)
    x = np.array([[1.5]])
    d = diffusion_extend_probe(Q, sp, 4.0, symbol_q(), x)
    # int_0^inf t^4 (1+t)^{-8} dt/t = B(4, 4) = 1/140
    assert d.quantities["upper_ratio"] == pytest.approx(140 ** -0.25, rel=1e-6)
    # L^2(dt/t) norm of q is 6^{-1/2}
    assert d.quantities["lower_ratio"] == pytest.approx(6 ** 0.5, rel=1e-6)
    assert d.params["assumes"] == "UMD"


def test_diffusion_projects_out_constants():
    rng = np.random.default_rng(3)
    Q = cycle_laplacian(6)
    sp = SpaceDescriptor.lp(3, 2)
    x = rng.standard_normal((6, 2))
    d1 = diffusion_extend_probe(Q, sp, 2.0, symbol_q(), x)
    d2 = diffusion_extend_probe(Q, sp, 2.0, symbol_q(), x + 5.0)
    assert d1.params["kernel_projection"]
    assert d1.lhs == pytest.approx(d2.lhs, rel=1e-10)
    assert d1.holds
    with pytest.raises(ValueError):
        diffusion_extend_probe(Q, SpaceDescriptor.lp(3, 3), 2.0, symbol_q(), x)


def test_semigroup_contractive_in_lr():
    Q = cycle_laplacian(8)
    S = expm(-0.7 * Q)
    x = np.random.default_rng(0).standard_normal(8)
    for r in (1, 2, 3, np.inf):
        assert np.linalg.norm(S @ x, r) <= np.linalg.norm(x, r) + 1e-12
