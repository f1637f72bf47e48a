"""Real-interpolation norms between X and D(A), and the Besov embedding probes.

The real norm of order (theta, p) is ||t^{-theta} w(tA) x||_{L^p(dt/t; X)}
with w(z) = z/(1+z), plus ||x|| when A is not invertible. The fractional
domain norm is ||A^theta x||.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .banach import SpaceDescriptor
from .calculus.dunford import contour_apply, fractional_power
from .calculus.operators import SectorialOperator, as_operator
from .calculus.symbols import symbol_v, symbol_w
from .gamma import MeasuredGrid
from .probes import ProbeResult

GRID_DELTA = 1e-12
GRID_POINTS = 256
ENDPOINT_TOL = 1e-9


@dataclass(frozen=True)
class InterpolationNorm:
    theta: float
    p: float
    base_norm: float
    integral: float
    invertible: bool

    @property
    def value(self):
        return self.integral if self.invertible else self.integral + self.base_norm

    def __float__(self):
        return float(self.value)


def _invertible(op: SectorialOperator):
    if op.shift != 0.0:
        return False
    return math.isfinite(op.inverse_norm())


def interp_grid(op: SectorialOperator, theta, p, points=GRID_POINTS, delta=GRID_DELTA):
    """dt/t grid where the t^{-theta} w(t lambda) profile falls below delta at both ends."""
    lmin, lmax = op.spectral_bounds()
    pe = 1.0 if p == math.inf else float(p)
    t_lo = delta ** (1 / ((1 - theta) * pe)) / lmax
    t_hi = delta ** (-1 / (theta * pe)) / lmin
    return MeasuredGrid.halfline(t_lo, t_hi, points)


def _check_theta(theta):
    theta = float(theta)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    return theta


def _space_for(op, space):
    return SpaceDescriptor.lp(2, op.n) if space is None else space


def w_trace(A, X, theta, grid: MeasuredGrid):
    """t^{-theta} w(tA) X on the grid; shape (T, n, B)."""
    op = as_operator(A)
    t = grid.points()
    V = contour_apply(op, symbol_w(), X, t)
    return V * (t ** -theta)[:, None, None]


def _lp_over_grid(norms, masses, p):
    if p == math.inf:
        return norms.max(axis=0)
    return np.sum(masses[:, None] * norms ** p, axis=0) ** (1 / p)


def interp_integrals(A, X, theta, ps, space=None, grid=None, points=GRID_POINTS):
    """Integral parts for each exponent in ``ps`` and each column of X."""
    op = as_operator(A)
    theta = _check_theta(theta)
    space = _space_for(op, space)
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    if grid is None:
        grid = interp_grid(op, theta, min(float(p) for p in ps), points)
    V = w_trace(op, X, theta, grid)
    T, n, B = V.shape
    norms = np.asarray(space.norm(np.moveaxis(V, 2, 1).reshape(T * B, n))).reshape(T, B)
    # the grid is sized for the p-th power of the integrand, so compare p-th powers
    pe = min(1.0 if p == math.inf else float(p) for p in ps)
    rel = norms[[0, -1]].max(axis=0) / np.maximum(norms.max(axis=0), 1e-300)
    if np.any(rel ** pe > ENDPOINT_TOL):
        raise ValueError("interpolation integrand has not decayed at the grid ends")
    return {float(p): _lp_over_grid(norms, grid.masses, float(p)) for p in ps}


def real_interp_norm(A, x, theta, p, space=None, grid=None, points=GRID_POINTS) -> InterpolationNorm:
    """Real interpolation norm of x between X and D(A)."""
    op = as_operator(A)
    space = _space_for(op, space)
    x = np.asarray(x, dtype=complex)
    p = float(p)
    base = float(space.norm(x))
    if base == 0.0:
        return InterpolationNorm(float(theta), p, 0.0, 0.0, _invertible(op))
    J = float(interp_integrals(op, x, theta, [p], space, grid, points)[p][0])
    return InterpolationNorm(float(theta), p, base, J, _invertible(op))


def fractional_domain_norm(A, x, theta, space=None, method="auto"):
    """||A^theta x||, plus ||x|| when A is not invertible."""
    op = as_operator(A)
    space = _space_for(op, space)
    x = np.asarray(x, dtype=complex)
    val = float(space.norm(fractional_power(op, theta, method) @ x))
    return val if _invertible(op) else val + float(space.norm(x))


def v_identity_residual(A, x, theta, grid=None, points=64):
    """max_t ||v_theta(tA) A^theta x - t^{-theta} w(tA) x|| relative to the largest term."""
    op = as_operator(A)
    theta = _check_theta(theta)
    grid = grid or interp_grid(op, theta, 2.0, points)
    t = grid.points()
    y = fractional_power(op, theta) @ np.asarray(x, dtype=complex)
    lhs = contour_apply(op, symbol_v(theta), y, t)
    rhs = contour_apply(op, symbol_w(), x, t) * (t ** -theta)[:, None]
    scale = max(float(np.abs(rhs).max()), 1e-300)
    return float(np.abs(lhs - rhs).max()) / scale


def gamma_constant(theta):
    """Gamma(2 - 2 theta) Gamma(2 theta) = int_0^inf s^{1 - 2 theta} (1 + s)^{-2} ds."""
    return math.gamma(2 - 2 * theta) * math.gamma(2 * theta)


def _chain(op, X, theta, p, q, space):
    J = interp_integrals(op, X, theta, [p, q], space)
    Ath = fractional_power(op, theta)
    base = np.asarray(space.norm((X).T))
    F = np.asarray(space.norm((Ath @ X).T))
    if not _invertible(op):
        F = F + base
        Jp, Jq = J[p] + base, J[q] + base
    else:
        Jp, Jq = J[p], J[q]
    return np.atleast_1d(Jp), np.atleast_1d(Jq), np.atleast_1d(F)


def interp_chain_probe(A, theta, p, q, trials=32, seed=0, space=None, X=None) -> ProbeResult:
    """Max over random x of J_q/||A^theta x|| and ||A^theta x||/J_p.

    p is the declared type and q the declared cotype of the space.
    """
    op = as_operator(A)
    theta = _check_theta(theta)
    space = _space_for(op, space)
    p, q = float(p), float(q)
    if X is None:
        rng = np.random.default_rng(seed)
        X = (rng.standard_normal((trials, op.n)) + 1j * rng.standard_normal((trials, op.n))).T
    Jp, Jq, F = _chain(op, np.asarray(X, dtype=complex), theta, p, q, space)
    upper = Jq / F
    lower = F / Jp
    k = int(np.argmax(upper))
    res = ProbeResult(
        "interp.chain", float(Jq[k]), float(F[k]), seed=seed,
        params={"theta": theta, "p": p, "q": q, "trials": int(F.size), "space": str(space),
                "declared": {"type": p, "cotype": q}, "shift": op.shift},
        quantities={"max_upper": float(upper.max()), "max_lower": float(lower.max()),
                    "upper": upper, "lower": lower},
    )
    res.holds = bool(np.all(np.isfinite(upper)) and np.all(np.isfinite(lower)))
    return res


@dataclass(frozen=True)
class BesovConfig:
    """Periodic grid of N points, integrability r, smoothness 2 theta.

    ``microscopic``, when set, adds the norm J_microscopic to probe output.
    """

    r: float
    N: int
    theta: float = 0.5
    microscopic: float | None = None

    def __post_init__(self):
        if not 1 < self.r < math.inf:
            raise ValueError("r must lie in (1, inf)")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        _check_theta(self.theta)

    @property
    def space(self):
        return SpaceDescriptor.weighted_lp(self.r, np.full(self.N, 1.0 / self.N))


def periodic_laplacian(N):
    """Circulant matrix with Fourier multiplier 4 N^2 sin^2(pi k/N) + 1."""
    k = np.arange(N)
    mult = 4 * N ** 2 * np.sin(np.pi * k / N) ** 2 + 1.0
    F = np.fft.fft(np.eye(N), axis=0)
    return np.real(np.fft.ifft(mult[:, None] * F, axis=0))


def besov_test_data(N, trials, rng, theta=0.5):
    """Columns of lacunary random-sign sums and disjoint multiscale bumps.

    Both are scaled level by level so every dyadic band carries comparable
    smoothness-weighted mass. Column 0 is always a lacunary sum.
    """
    x = np.arange(N) / N
    levels = int(math.log2(N)) - 1
    out = np.empty((N, trials))
    for c in range(trials):
        if c % 2 == 0:
            v = np.zeros(N)
            for j in range(levels + 1):
                k = 2 ** j if j < levels else N // 2 - 1
                mu = 4 * N ** 2 * math.sin(math.pi * k / N) ** 2 + 1.0
                amp = mu ** -theta * (1.0 if c == 0 else rng.uniform(0.5, 1.5))
                v += amp * rng.choice([-1.0, 1.0]) * np.cos(2 * np.pi * k * x + rng.uniform(0, 2 * np.pi))
        else:
            v = np.zeros(N)
            starts = rng.permutation(N)
            for j in range(1, levels + 1):
                w = max(N >> j, 2)
                s0 = starts[j]
                idx = (s0 + np.arange(w)) % N
                bump = np.sin(np.pi * (np.arange(w) + 0.5) / w) ** 2
                mu = (4 * N ** 2 * math.sin(math.pi / w) ** 2 + 1.0)
                v[idx] += rng.choice([-1.0, 1.0]) * mu ** -theta * bump * (w / N) ** (-1 / 4)
        out[:, c] = v
    return out


def besov_chain_probe(config: BesovConfig, trials=16, seed=0, swapped=False) -> ProbeResult:
    """Embedding ratios between B_{r,2}, H^{r} and B_{r,r} built from the periodic Laplacian.

    r >= 2: ||A^theta x|| / J_2 and J_r / ||A^theta x|| stay bounded.
    r <= 2: ||A^theta x|| / J_r and J_2 / ||A^theta x|| stay bounded.
    ``swapped`` exchanges the two outer exponents (the false direction).
    """
    r, N, theta = config.r, config.N, config.theta
    p, q = (2.0, r) if r >= 2 else (r, 2.0)
    if swapped:
        p, q = q, p
    space = config.space
    op = SectorialOperator.certify(periodic_laplacian(N), shift=0.0, name=f"periodic-laplacian:{N}")
    rng = np.random.default_rng(seed)
    X = besov_test_data(N, trials, rng, theta)
    Jp, Jq, F = _chain(op, X.astype(complex), theta, p, q, space)
    lower = F / Jp
    upper = Jq / F
    score = np.maximum(lower, upper)
    res = ProbeResult(
        "interp.besov" + (".swapped" if swapped else ""), float(max(lower.max(), upper.max())), 1.0,
        seed=seed,
        params={"r": r, "N": N, "theta": theta, "p": p, "q": q, "trials": trials, "swapped": swapped},
        quantities={"max_lower": float(lower.max()), "max_upper": float(upper.max()),
                    "argmax": int(np.argmax(score))},
    )
    if config.microscopic is not None:
        m = float(config.microscopic)
        res.quantities["J_microscopic"] = interp_integrals(op, X, theta, [m], space)[m]
    res.holds = bool(np.all(np.isfinite(score)))
    return res
