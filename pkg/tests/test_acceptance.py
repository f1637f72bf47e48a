"""Acceptance criteria 1-12; each test carries a ``criterion`` marker and the
terminal summary prints one pass/fail line per criterion."""
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from gammalab import cli
from gammalab.banach import SpaceDescriptor, VectorFamily, randomized_average
from gammalab.calculus import (SectorialOperator, calibrated_dual, diagonal_oracle, laplacian1d, lps_probe,
                               lps_sweep, reproducing_integral, symbol_apply, symbol_q, symbol_w)
from gammalab.gamma import (EstimatorConfig, GridFunction, MeasuredGrid, convolve, dilate, fourier,
                            gamma_norm, gamma_norm_hilbert_exact, kernel_l1, translate)
from gammalab.holo import (HoloFn, StripDomain, cauchy_derivative, kernel_masses, poisson_extend,
                           sinc_witness, theorem_probe)
from gammalab.interp import BesovConfig, besov_chain_probe, real_interp_norm, v_identity_residual


def _strictly_increasing_run(values):
    best = cur = 1
    for a, b in zip(values[:-1], values[1:]):
        cur = cur + 1 if b > a else 1
        best = max(best, cur)
    return best


# 1 -------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_hilbert_gamma_matches_exact_formula():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for case in range(50):
        n = int(rng.integers(1, 65))
        K = int(rng.integers(2, 200))
        grid = MeasuredGrid(np.sort(rng.uniform(-5, 5, K)), rng.uniform(0.01, 0.2, K))
        V = rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n))
        f = GridFunction(grid, SpaceDescriptor.lp(2, n), V)
        exact = gamma_norm_hilbert_exact(f)
        est = gamma_norm(f, EstimatorConfig(samples=10_000, seed=case, method="montecarlo"))
        err = abs(est.value - exact)
        assert err <= 3 * est.stderr, (case, err, est.stderr)
        assert err <= 0.02 * exact
    assert time.perf_counter() - start < 10.0


# 2 -------------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_exhaustive_rademacher_agrees_with_sampling(backend):
    rng = np.random.default_rng(7)
    for N in (1, 3, 6, 9, 12):
        for r in (1.5, 4.0, math.inf):
            n = int(rng.integers(1, 6))
            fam = VectorFamily(SpaceDescriptor.lp(r, n), rng.standard_normal((N, n)))
            ex = randomized_average(fam, 2.0, "rademacher", "exhaustive")
            mc = randomized_average(fam, 2.0, "rademacher", "montecarlo", samples=20_000, seed=N)
            assert abs(ex.value - mc.value) <= 3 * mc.stderr + 1e-12


@pytest.mark.criterion(2)
def test_exhaustive_two_vectors_is_sqrt2(backend):
    # E||e1 eps1 + e2 eps2||_2^2 = 2 for every sign choice
    fam = VectorFamily(SpaceDescriptor.lp(2, 2), np.eye(2))
    assert randomized_average(fam, 2.0, "rademacher", "exhaustive").value == pytest.approx(math.sqrt(2), abs=1e-15)


# 3 -------------------------------------------------------------------------

def _smooth(space, rng):
    x = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    y = rng.standard_normal(space.dim)
    return lambda t: np.exp(-t ** 2)[:, None] * x + (t * np.exp(-t ** 2))[:, None] * y


@pytest.mark.criterion(3)
def test_translation_is_exact_on_matched_grids():
    rng = np.random.default_rng(3)
    space = SpaceDescriptor.lp(4, 3)
    f = GridFunction.from_callable(MeasuredGrid.uniform(-8, 8, 800), space, _smooth(space, rng))
    cfg = EstimatorConfig(samples=5000, seed=11)
    for h in (0.37, -2.0, 5.125):
        assert gamma_norm(translate(f, h), cfg).value == gamma_norm(f, cfg).value


@pytest.mark.criterion(3)
def test_dilation_scales_by_inverse_sqrt():
    rng = np.random.default_rng(4)
    space = SpaceDescriptor.lp(4, 3)
    fn = _smooth(space, rng)
    cfg = EstimatorConfig(samples=20_000, seed=5)
    f = GridFunction.from_callable(MeasuredGrid.uniform(-8, 8, 3200), space, fn)
    base = gamma_norm(f, cfg).value
    for a in (0.5, 2.0, 3.0):
        scaled = gamma_norm(dilate(f, a, fn=fn, cells=3200), cfg).value
        assert scaled * math.sqrt(a) == pytest.approx(base, rel=1e-3)


@pytest.mark.criterion(3)
def test_fourier_isometry_band_limited():
    rng = np.random.default_rng(5)
    space = SpaceDescriptor.lp(4, 3)
    f = GridFunction.from_callable(MeasuredGrid.uniform(-8, 8, 1024), space, _smooth(space, rng))
    cfg = EstimatorConfig(samples=20_000, seed=6, law="gaussian-complex")
    assert gamma_norm(fourier(f), cfg).value == pytest.approx(gamma_norm(f, cfg).value, rel=1e-6)


@pytest.mark.criterion(3)
def test_convolution_contracts_in_100_cases():
    for i in range(100):
        rng = np.random.default_rng(100 + i)
        n = int(rng.integers(1, 5))
        space = SpaceDescriptor.lp(float(rng.choice([1.5, 2.0, 3.0, 4.0, math.inf])), n)
        f = GridFunction(MeasuredGrid.uniform(-4, 4, 200), space, rng.standard_normal((200, n)))
        width = rng.uniform(0.05, 1.0)
        freq = rng.uniform(0, 5)
        k = lambda d: np.exp(-np.abs(d) / width) * np.cos(freq * d)
        cfg = EstimatorConfig(samples=4000, seed=i)
        assert gamma_norm(convolve(f, k), cfg).value <= kernel_l1(f, k) * gamma_norm(f, cfg).value


# 4 -------------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("y", [0.0, 0.5, -0.5])
def test_poisson_kernel_mass_is_one(y):
    assert sum(kernel_masses(y, 1.0)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.criterion(4)
@pytest.mark.parametrize("y", [0.0, 0.5, -0.5, 0.9])
def test_poisson_reconstructs_rational_function(y):
    b = 1.0
    f = lambda z: 1 / (z ** 2 + 4)
    grid = MeasuredGrid.uniform(-80, 80, 16_000)
    t = grid.points()
    space = SpaceDescriptor.lp(2, 1)
    top = GridFunction(grid, space, f(t + 1j * b)[:, None])
    bottom = GridFunction(grid, space, f(t - 1j * b)[:, None])
    u = poisson_extend(top, bottom, y, b)
    inside = np.abs(t) <= 10
    assert np.abs(u.values[inside, 0] - f(t[inside] + 1j * y)).max() <= 1e-4


# 5 -------------------------------------------------------------------------

def _exp_fn():
    return HoloFn.scalar(np.exp, [1.0], StripDomain(1.0))


@pytest.mark.criterion(5)
@pytest.mark.parametrize("a", [0.0, 0.3 + 0.2j, -1.5 - 0.4j])
def test_cauchy_derivatives_of_exp(a):
    F = _exp_fn()
    for n in range(6):
        got = cauchy_derivative(F, a, n, nodes=64)[0]
        assert abs(got - np.exp(a)) <= 1e-10


@pytest.mark.criterion(5)
def test_cauchy_error_decays_geometrically():
    F = _exp_fn()
    a = 0.3 + 0.2j
    for n in (1, 2, 3):
        errs = np.array([abs(cauchy_derivative(F, a, n, nodes=K)[0] - np.exp(a)) for K in range(n + 1, n + 12)])
        above = errs[errs > 1e-11]
        assert above.size >= 3
        assert np.all(above[1:] / above[:-1] < 0.5)


@pytest.mark.criterion(5)
def test_cauchy_rate_matches_pole_distance():
    # pole at distance 2 from a, contour radius 0.5: error ~ 4^{-K}
    pole = 2j
    F = HoloFn.scalar(lambda z: 1 / (z - pole), [1.0], StripDomain(1.0))
    exact = -1 / (0 - pole) ** 2
    nodes = np.arange(4, 20)
    errs = np.array([abs(cauchy_derivative(F, 0.0, 1, radius=0.5, nodes=K)[0] - exact) for K in nodes])
    slope = np.polyfit(nodes, np.log(errs), 1)[0]
    assert slope == pytest.approx(math.log(0.25), rel=0.05)


# 6 -------------------------------------------------------------------------

def _random_sectorial(rng, n=8):
    lam = rng.uniform(0.5, 5.0, n) * np.exp(1j * rng.uniform(-1.0, 1.0, n))
    V = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    return SectorialOperator.certify(V @ np.diag(lam) @ np.linalg.inv(V))


@pytest.mark.criterion(6)
def test_dunford_matches_diagonalization():
    q = symbol_q()
    D = np.diag([1.0, 2.0, 5.0])
    assert np.abs(symbol_apply(D, q) - np.diag(q(np.array([1.0, 2.0, 5.0])))).max() <= 1e-6
    rng = np.random.default_rng(66)
    for _ in range(10):
        op = _random_sectorial(rng)
        assert np.abs(symbol_apply(op, q) - diagonal_oracle(op, q)).max() <= 1e-6


@pytest.mark.criterion(6)
def test_dunford_contour_angle_independence():
    rng = np.random.default_rng(67)
    q = symbol_q()
    for _ in range(3):
        op = _random_sectorial(rng)
        lo, hi = op.angle, math.pi
        A1 = symbol_apply(op, q, nu=lo + 0.3 * (hi - lo))
        A2 = symbol_apply(op, q, nu=lo + 0.7 * (hi - lo))
        assert np.abs(A1 - A2).max() <= 1e-8


@pytest.mark.criterion(6)
def test_rational_identity_w_plus_resolvent():
    rng = np.random.default_rng(68)
    for op in (SectorialOperator.certify(np.diag([1.0, 2.0, 5.0])), _random_sectorial(rng)):
        lhs = symbol_apply(op, symbol_w()) + np.linalg.inv(np.eye(op.n) + op.effective)
        assert np.abs(lhs - np.eye(op.n)).max() <= 1e-8


# 7 -------------------------------------------------------------------------

@pytest.mark.criterion(7)
@pytest.mark.parametrize("level", [0.0, 0.1, -0.25])
def test_witness_fourier_transform(level):
    w = sinc_witness(5)
    t = np.linspace(-2, 60, 41)
    for n in range(1, 6):
        num = w.numerical_transform(n, t, level)
        assert np.abs(num - w.boundary_values(n, t, level)).max() <= 1e-6


@pytest.mark.criterion(7)
@pytest.mark.parametrize("r", [1.5, 4.0])
def test_witness_gamma_is_sqrt2_gaussian_average(r):
    rng = np.random.default_rng(77)
    N, n = 6, 4
    X = rng.standard_normal((N, n))
    space = SpaceDescriptor.lp(r, n)
    w = sinc_witness(N, coefficients=X, space=space)
    g = w.line_gamma(0.0, EstimatorConfig(samples=40_000, seed=1))
    avg = randomized_average(VectorFamily(space, X), 2.0, "gaussian-real", samples=40_000, seed=2)
    se = math.hypot(g.stderr, math.sqrt(2) * avg.stderr)
    assert abs(g.value - math.sqrt(2) * avg.value) <= 3 * se


# 8 -------------------------------------------------------------------------

@pytest.mark.criterion(8)
def test_theorem_probes_on_witnesses():
    start = time.perf_counter()
    sizes = (4, 8, 16, 32)
    cfg = EstimatorConfig(samples=10_000, seed=8)
    c4, c2, hilbert_type, hilbert_cotype = [], [], [], []
    for N in sizes:
        w4 = sinc_witness(N, space=SpaceDescriptor.lp(4, N), mode="cotype")
        c4.append(theorem_probe(w4, "cotype", 4.0, config=cfg).ratio)
        c2.append(theorem_probe(w4, "cotype", 2.0, config=cfg).ratio)
        w2 = sinc_witness(N, space=SpaceDescriptor.lp(2, N), mode="cotype")
        hilbert_type.append(theorem_probe(w2, "type", 2.0, config=cfg).ratio)
        hilbert_cotype.append(theorem_probe(w2, "cotype", 2.0, config=cfg).ratio)
    assert max(c4) / min(c4) <= 1.25
    assert all(b > a for a, b in zip(c2[:-1], c2[1:]))
    for ratios in (hilbert_type, hilbert_cotype):
        assert max(ratios) / min(ratios) <= 1.10
    assert time.perf_counter() - start < 120.0


# 9 -------------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_lps_eigenvector_reproduces_scalar_constant():
    q = symbol_q()
    oracle = math.sqrt(quad(lambda s: abs(q.fn(math.exp(s))) ** 2, -60, 60, limit=200)[0])
    assert oracle == pytest.approx(6 ** -0.5, abs=1e-10)
    A = laplacian1d(16)
    lam, V = np.linalg.eigh(A)
    space = SpaceDescriptor.lp(2, 16)
    for k in (0, 7, 15):
        res = lps_probe(A, q, V[:, k], space, p=2, q=2)
        assert res.ratio == pytest.approx(oracle, abs=1e-4)


@pytest.mark.criterion(9)
def test_lps_l4_laplacian_grid_refinement():
    rng = np.random.default_rng(99)
    A = laplacian1d(16)
    space = SpaceDescriptor.lp(4, 16)
    xs = rng.standard_normal((16, 100)) + 1j * rng.standard_normal((16, 100))
    coarse = max(r.ratio for r in lps_sweep(A, symbol_q(), xs, space, points=64))
    fine = max(r.ratio for r in lps_sweep(A, symbol_q(), xs, space, points=128))
    assert abs(fine - coarse) / fine < 0.05


# 10 ------------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_calibrated_dual_of_q():
    q = symbol_q()
    g = calibrated_dual(q)
    assert g.params["c"] == pytest.approx(6.0, abs=1e-6)
    assert abs(reproducing_integral(q, g) - 1.0) <= 1e-8


# 11 ------------------------------------------------------------------------

@pytest.mark.criterion(11)
@pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
def test_real_interp_norm_closed_form(theta):
    lam = np.array([0.5, 2.0, 30.0])
    A = np.diag(lam)
    const = gamma_fn(2 - 2 * theta) * gamma_fn(2 * theta)
    for k in range(3):
        x = np.zeros(3)
        x[k] = 1.0
        J = real_interp_norm(A, x, theta, 2.0).value
        assert J == pytest.approx(lam[k] ** theta * math.sqrt(const), rel=1e-4)


@pytest.mark.criterion(11)
@pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
def test_v_identity(theta):
    rng = np.random.default_rng(111)
    x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    assert v_identity_residual(laplacian1d(12), x, theta) <= 1e-7


@pytest.mark.criterion(11)
def test_besov_chain_bounded_and_swapped_grows():
    start = time.perf_counter()
    sizes = (16, 32, 64, 128)
    straight = [besov_chain_probe(BesovConfig(4.0, N), seed=3).lhs for N in sizes]
    swapped = [besov_chain_probe(BesovConfig(4.0, N), seed=3, swapped=True).lhs for N in sizes]
    assert max(straight) / min(straight) <= 1.25
    assert _strictly_increasing_run(swapped) >= 3
    assert time.perf_counter() - start < 120.0


# 12 ------------------------------------------------------------------------

RUNS = [
    ["--probe", "type-constant", "--space", "lp:4:4", "--N", "6", "--samples", "2000", "--trials", "3"],
    ["--probe", "lps", "--operator", "laplacian1d:8", "--space", "lp:4:8", "--trials", "5", "--points", "64"],
    ["--probe", "besov,interp-chain", "--sizes", "16,32", "--trials", "4", "--operator", "laplacian1d:8"],
    ["--probe", "cotype-theorem", "--space", "lp:4:4", "--sizes", "4,8", "--samples", "2000"],
]


@pytest.mark.criterion(12)
@pytest.mark.parametrize("argv", RUNS, ids=lambda a: a[1])
def test_same_seed_gives_identical_csv(argv, tmp_path, monkeypatch):
    outputs = []
    for i, threads in enumerate(("1", "4", "1")):
        monkeypatch.setenv("GAMMALAB_THREADS", threads)
        out = tmp_path / f"run{i}.csv"
        assert cli.main(["run", *argv, "--seed", "42", "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    assert len(outputs[0].splitlines()) > 1
