"""Lattice gamma functional and the strip/level chain probes."""
from __future__ import annotations

import math
import warnings

import numpy as np

from ..banach import SpaceDescriptor, VectorFamily, randomized_average
from ..gamma import (EstimatorConfig, GammaEstimate, GridFunction, MeasuredGrid, gamma_norm,
                     lp_norm)
from ..probes import ProbeResult, safe_ratio
from .domains import StripDomain

LATTICE_TOL = 1e-8
S_GRID = 8


def _values(f, z, order):
    return np.asarray(f(z) if order == 0 else f.derivative(z, order), dtype=complex).reshape(np.size(z), -1)


def lattice_truncation(f, tol=LATTICE_TOL):
    """Smallest N (doubling from 8) whose certified lattice tail is below tol * C."""
    if f.decay is None:
        raise ValueError("no decay certificate: pass an explicit truncation")
    N = 8
    while f.decay.lattice_tail(N) > tol * max(f.decay.C, 1e-300):
        N *= 2
        if N > 1 << 22:
            raise ValueError("decay certificate too weak for lattice truncation")
    return N


def lattice_gamma(f, shift=0.0, level=0.0, truncation=None, config=None, order=0) -> GammaEstimate:
    """Gaussian average of {f^{(order)}(n + shift + i level)}_{|n| <= N}."""
    config = config or EstimatorConfig()
    N = lattice_truncation(f) if truncation is None else int(truncation)
    n = np.arange(-N, N + 1)
    z = n + shift + 1j * level
    V = _values(f, z, order)
    fam = VectorFamily(f.space, V)
    method = config.method
    if method == "auto":
        method = "exact" if f.space.is_hilbert else "montecarlo"
    if method == "exact":
        if not f.space.is_hilbert:
            raise ValueError("exact lattice gamma needs a Hilbert space")
        val = float(np.sqrt(np.sum(fam.norms() ** 2)))
        return GammaEstimate(val, 0.0, z.size, config, diagnostics={"N": N, "method": "exact"})
    avg = randomized_average(fam, 2.0, config.law, "montecarlo", config.samples, config.seed)
    return GammaEstimate(avg.value, avg.stderr, z.size, config, diagnostics={"N": N, "method": "montecarlo"})


def _check_levels(f, *levels):
    if isinstance(f.domain, StripDomain):
        for y in levels:
            if not abs(y) < f.domain.half_width:
                raise ValueError(f"level {y} outside the strip")


def _line_grid(T, cells):
    return MeasuredGrid.uniform(-T, T, cells)


def _line_fn(f, grid, y, order=0):
    return GridFunction(grid, f.space, _values(f, grid.coords + 1j * y, order))


def _slack(se, value, rel):
    return 3.0 * se + rel * abs(value) + 1e-12


def strip_chain_constant(a, b):
    """Explicit constant C with sup-lattice terms <= C ||f||_gamma(S_b)."""
    r = 0.999 * min(0.5, b - a)
    M = 4 * math.sqrt(2 * math.pi * math.log(2)) / (3 * math.pi * r ** 2)
    return 2 * (1 / (r * math.sqrt(math.pi)) + M), r


def strip_chain_probe(f, a, b, T=8.0, cells_per_unit=24, config=None, truncation=None, rtol=2e-3):
    """Lattice, strip and boundary-line gamma quantities on S_b.

    Q1 = sum_{j=+-1} max_s [gamma(f(.+s+ija)) + gamma(f'(.+s+ija))]
    Q2 = ||f||_gamma(S_b) on a planar grid of [-T, T] x (-b, b)
    Q3 = sum_j ||f(.+ijb)||_gamma(R)
    Q4 = sum_j [int_0^1 gamma(f'(.+s+ijb)) ds + gamma(f(.+ijb))]
    Asserts Q1 <= C Q2, Q2 <= Q3, Q3 <= Q4.
    """
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    _check_levels(f, a, b)
    config = config or EstimatorConfig()
    seed = config.seed
    N = truncation if truncation is not None else (lattice_truncation(f) if f.decay is not None else int(T))
    svals = np.arange(S_GRID) / S_GRID
    k = 0

    def lat(s, y, order):
        nonlocal k
        k += 1
        return lattice_gamma(f, s, y, N, config.with_seed(seed + k), order)

    Q1 = 0.0
    Q1_se = 0.0
    for j in (-1, 1):
        best, best_se = 0.0, 0.0
        for s in svals:
            e0, e1 = lat(s, j * a, 0), lat(s, j * a, 1)
            if e0.value + e1.value > best:
                best, best_se = e0.value + e1.value, math.hypot(e0.stderr, e1.stderr)
        Q1 += best
        Q1_se = math.hypot(Q1_se, best_se)

    nx = int(round(2 * T * cells_per_unit))
    ny = max(4, int(round(2 * b * cells_per_unit)))
    rect = MeasuredGrid.rectangle(-T, T, nx, -b, b, ny)
    F = GridFunction(rect, f.space, _values(f, rect.coords, 0))
    q2 = gamma_norm(F, config.with_seed(seed + 1000), lower_bound=False)

    line = _line_grid(T, nx)
    q3 = [gamma_norm(_line_fn(f, line, j * b), config.with_seed(seed + 2000 + j), lower_bound=False)
          for j in (-1, 1)]
    Q3 = sum(e.value for e in q3)
    Q3_se = math.hypot(*[e.stderr for e in q3])

    Q4, Q4_se = 0.0, 0.0
    for j in (-1, 1):
        d = [lat(s, j * b, 1) for s in svals]
        e0 = lat(0.0, j * b, 0)
        Q4 += float(np.mean([e.value for e in d])) + e0.value
        Q4_se = math.hypot(Q4_se, e0.stderr, float(np.sqrt(np.sum([e.stderr ** 2 for e in d]))) / len(d))

    C, r = strip_chain_constant(a, b)
    ok1 = Q1 <= C * q2.value + _slack(math.hypot(Q1_se, C * q2.stderr), Q1, rtol)
    ok2 = q2.value <= Q3 + _slack(math.hypot(q2.stderr, Q3_se), Q3, rtol)
    ok3 = Q3 <= Q4 + _slack(math.hypot(Q3_se, Q4_se), Q4, rtol)
    return ProbeResult(
        "strip-chain", Q1, q2.value, seed=seed,
        params={"a": a, "b": b, "T": T, "truncation": N, "s_points": S_GRID},
        quantities={"Q1": Q1, "Q2": q2.value, "Q3": Q3, "Q4": Q4},
        constants={"C1": C, "radius": r, "C2": 1.0, "C3": 1.0},
        holds=bool(ok1 and ok2 and ok3),
        diagnostics={"steps": [bool(ok1), bool(ok2), bool(ok3)]},
    )


def _y_space(f, grid, Y):
    kind = Y[0]
    if kind == "lp":
        p = float(Y[1])
        w = None if p == math.inf else grid.masses
        return SpaceDescriptor.power(f.space, grid.size, p, w)
    raise ValueError(f"no product space for {Y!r}")


def _y_norm(f, grid, y, Y, config, order=0):
    F = _line_fn(f, grid, y, order)
    if Y[0] == "gamma":
        e = gamma_norm(F, config, lower_bound=False)
        return e.value, e.stderr
    return lp_norm(F, Y[1]), 0.0


def y_chain_probe(f, a, b, c, d, Y=("lp", 2.0), k=1, T=8.0, cells=320, levels=9, s_cells=16,
                  config=None, rtol=1e-2):
    """Level-norm chain for Y = L^p(R; X) (``("lp", p)``) or gamma(R; X) (``("gamma",)``).

    E1 = sup_{|s|<=a} ||f(.+is)||_Y          E2 = int_{-b}^{b} ||f(.+is)||_Y ds
    E3 = sum_{j<=k} ||s -> f^{(j)}(.+is)||_gamma((-b,b); Y)
    E4 = sup_{|s|<=b} sum_{j<=k+1} ||f^{(j)}(.+is)||_Y
    E5 = sup_{|s|<=c} ||f(.+is)||_Y          E6 = sum_{j=+-1} ||f(.+ijd)||_Y
    """
    if not 0 <= a < b < c < d:
        raise ValueError("need 0 <= a < b < c < d")
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_levels(f, d)
    config = config or EstimatorConfig()
    seed = config.seed
    grid = _line_grid(T, cells)
    cnt = [0]

    def yn(y, order=0):
        cnt[0] += 1
        return _y_norm(f, grid, y, Y, config.with_seed(seed + cnt[0]), order)

    def sup_over(hi, order_max=0):
        ss = np.linspace(-hi, hi, levels) if hi > 0 else np.array([0.0])
        vals = []
        for s in ss:
            vals.append(sum(yn(s, j)[0] for j in range(order_max + 1)))
        return max(vals)

    E1 = sup_over(a)
    xg, wg = np.polynomial.legendre.leggauss(24)
    E2 = float(sum(w * b * yn(b * x)[0] for x, w in zip(xg, wg)))

    sgrid = MeasuredGrid.uniform(-b, b, s_cells)
    E3, E3_se = 0.0, 0.0
    for j in range(k + 1):
        if Y[0] == "gamma":
            rect = MeasuredGrid(
                (grid.coords[None, :] + 1j * sgrid.coords[:, None]).ravel(),
                np.outer(sgrid.masses, grid.masses).ravel(), "planar-region")
            V = _values(f, rect.coords, j)
            e = gamma_norm(GridFunction(rect, f.space, V), config.with_seed(seed + 500 + j), lower_bound=False)
        else:
            space = _y_space(f, grid, Y)
            rows = [_values(f, grid.coords + 1j * s, j).ravel() for s in sgrid.coords]
            e = gamma_norm(GridFunction(sgrid, space, np.array(rows)), config.with_seed(seed + 500 + j),
                           lower_bound=False)
        E3 += e.value
        E3_se = math.hypot(E3_se, e.stderr)

    E4 = sup_over(b, k + 1)
    E5 = sup_over(c)
    E6 = yn(d)[0] + yn(-d)[0]

    L = 2 * b
    C1 = 1.0 / (b - a)
    C2 = max(L ** 0.5, L ** 1.5)
    C3 = L ** 0.5 * (1 + L) * (k + 2)
    checks = [
        E1 <= C1 * E2 + _slack(0, E1, rtol),
        E2 <= C2 * E3 + _slack(C2 * E3_se, E2, rtol),
        E3 <= C3 * E4 + _slack(E3_se, E3, rtol),
        math.isfinite(E4) and math.isfinite(E5) and (E4 == 0 or E5 > 0),
        E5 <= E6 + _slack(0, E5, rtol),
    ]
    Es = [E1, E2, E3, E4, E5, E6]
    return ProbeResult(
        "y-chain", E1, E2, seed=seed,
        params={"a": a, "b": b, "c": c, "d": d, "Y": list(Y), "k": k, "T": T},
        quantities={f"E{i + 1}": v for i, v in enumerate(Es)},
        constants={"C1": C1, "C2": C2, "C3": C3, "C4_measured": safe_ratio(E4, E5), "C5": 1.0},
        holds=bool(all(checks)), diagnostics={"steps": [bool(x) for x in checks]},
    )


def _sobolev(f, grid, ell, p):
    total = 0.0
    for j in range(ell + 1):
        total += lp_norm(GridFunction(grid, f.space, _values(f, grid.coords, j)), p)
    return total


def disk_nesting_probe(f, center, radii, k=0, ell=0, p=2.0, nr=24, ntheta=64, config=None):
    """W^{ell,p}(D1), gamma^k(D2), W^{ell,p}(D3) on nested disks.

    Derivatives are complex derivatives; the recorded constants are
    C_left = W(D1)/gamma^k(D2) and C_right = gamma^k(D2)/W(D3).
    """
    r1, r2, r3 = radii
    if not 0 < r1 < r2 < r3:
        raise ValueError("need 0 < r1 < r2 < r3")
    if not float(np.min(f.domain.distance_to_boundary(np.asarray(center, dtype=complex)))) > r3:
        raise ValueError("outer disk leaves the domain")
    if nr * ntheta < 256:
        warnings.warn("planar grid may be too coarse to resolve the disks", RuntimeWarning)
    config = config or EstimatorConfig()
    g1, g2, g3 = (MeasuredGrid.disk(center, r, nr, ntheta) for r in radii)
    W1 = _sobolev(f, g1, ell, p)
    W3 = _sobolev(f, g3, ell, p)
    G2, se = 0.0, 0.0
    for j in range(k + 1):
        e = gamma_norm(GridFunction(g2, f.space, _values(f, g2.coords, j)),
                       config.with_seed(config.seed + j), lower_bound=False)
        G2 += e.value
        se = math.hypot(se, e.stderr)
    finite = all(math.isfinite(v) for v in (W1, G2, W3))
    return ProbeResult(
        "disk-nesting", W1, G2, stderr=0.0, seed=config.seed,
        params={"center": complex(center), "radii": list(radii), "k": k, "ell": ell, "p": float(p)},
        quantities={"W_inner": W1, "gamma_middle": G2, "W_outer": W3, "gamma_stderr": se},
        constants={"C_left": safe_ratio(W1, G2), "C_right": safe_ratio(G2, W3)},
        holds=bool(finite),
    )
