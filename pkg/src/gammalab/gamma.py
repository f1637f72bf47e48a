"""Gaussian square-function norms of grid functions.

A grid function is the step function ``sum_k 1_{cell k} v_k``. With the
normalized cell indicators as orthonormal basis its gamma norm is the
Gaussian average of ``{sqrt(m_k) v_k}``, which is exact for step functions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .banach import SpaceDescriptor, VectorFamily, randomized_average
from .probes import ProbeResult, ratio_stderr, safe_ratio

MEASURE_TAGS = ("lebesgue-interval", "halfline-dt-over-t", "planar-region")


class NotHilbertError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MeasuredGrid:
    """Cells with midpoints ``coords`` and positive ``masses``.

    1-D tags store real, strictly increasing coordinates; the half-line
    with dt/t is stored in log coordinates s = log t so its measure is ds.
    Planar grids store complex midpoints x + iy.
    """

    coords: np.ndarray
    masses: np.ndarray
    tag: str = "lebesgue-interval"

    def __post_init__(self):
        if self.tag not in MEASURE_TAGS:
            raise ValueError(f"unknown measure tag {self.tag!r}")
        m = np.asarray(self.masses, dtype=float).ravel()
        if self.tag == "planar-region":
            c = np.asarray(self.coords, dtype=complex).ravel()
        else:
            c = np.asarray(self.coords, dtype=float).ravel()
            if c.size > 1 and not np.all(np.diff(c) > 0):
                raise ValueError("coordinates must be strictly increasing")
        if c.shape != m.shape:
            raise ValueError("coords and masses must have equal length")
        if np.any(~(m > 0)):
            raise ValueError("cell masses must be positive")
        c.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "masses", m)

    @classmethod
    def uniform(cls, lo, hi, cells):
        h = (hi - lo) / cells
        return cls(lo + h * (np.arange(cells) + 0.5), np.full(cells, h))

    @classmethod
    def halfline(cls, tmin, tmax, cells):
        """dt/t on [tmin, tmax], uniform in s = log t."""
        g = cls.uniform(math.log(tmin), math.log(tmax), cells)
        return cls(g.coords, g.masses, "halfline-dt-over-t")

    @classmethod
    def rectangle(cls, x_lo, x_hi, nx, y_lo, y_hi, ny):
        hx = (x_hi - x_lo) / nx
        hy = (y_hi - y_lo) / ny
        x = x_lo + hx * (np.arange(nx) + 0.5)
        y = y_lo + hy * (np.arange(ny) + 0.5)
        Z = (x[None, :] + 1j * y[:, None]).ravel()
        return cls(Z, np.full(Z.size, hx * hy), "planar-region")

    @classmethod
    def disk(cls, center, radius, nr, ntheta):
        """Polar cells of the disk; mass = exact annular-sector area."""
        edges = np.linspace(0.0, radius, nr + 1)
        rm = 0.5 * (edges[1:] + edges[:-1])
        dth = 2 * math.pi / ntheta
        th = dth * (np.arange(ntheta) + 0.5)
        area = 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2) * dth
        Z = (center + rm[:, None] * np.exp(1j * th[None, :])).ravel()
        return cls(Z, np.repeat(area, ntheta), "planar-region")

    @property
    def size(self):
        return self.coords.size

    @property
    def is_uniform(self):
        if self.tag == "planar-region" or self.size < 2:
            return self.tag != "planar-region"
        d = np.diff(self.coords)
        return bool(np.allclose(d, d[0], rtol=1e-10, atol=0) and np.allclose(self.masses, d[0], rtol=1e-10))

    @property
    def spacing(self):
        if not self.is_uniform:
            raise ValueError("grid is not uniform")
        return float(self.masses[0])

    def points(self):
        """Points where functions are evaluated (t = e^s on the half-line)."""
        if self.tag == "halfline-dt-over-t":
            return np.exp(self.coords)
        return self.coords

    def subgrid(self, mask):
        mask = np.asarray(mask)
        return MeasuredGrid(self.coords[mask], self.masses[mask], self.tag)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: MeasuredGrid
    space: SpaceDescriptor
    values: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.values, dtype=complex)
        if V.ndim == 1 and self.space.dim == 1:
            V = V.reshape(-1, 1)
        if V.shape != (self.grid.size, self.space.dim):
            raise ValueError(f"values must have shape {(self.grid.size, self.space.dim)}, got {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "values", V)

    @classmethod
    def from_callable(cls, grid, space, fn):
        """Sample ``fn`` (vectorized, returning (K, dim) or (K,)) at grid points."""
        V = np.asarray(fn(grid.points()), dtype=complex)
        if V.ndim == 1:
            V = V.reshape(-1, 1) if space.dim == 1 else V[:, None]
        return cls(grid, space, V)

    @classmethod
    def tensor(cls, grid, space, h, x):
        """h(t) x for scalar h (callable or array)."""
        hv = h(grid.points()) if callable(h) else np.asarray(h)
        return cls(grid, space, np.asarray(hv, dtype=complex)[:, None] * np.asarray(x, dtype=complex)[None, :])

    def family(self):
        """The vectors sqrt(m_k) v_k whose Gaussian sum realizes I_f."""
        return VectorFamily(self.space, np.sqrt(self.grid.masses)[:, None] * self.values)

    def pointwise_norms(self):
        if self.grid.size == 0:
            return np.zeros(0)
        return np.atleast_1d(self.space.norm(self.values))

    def restrict(self, mask):
        mask = np.asarray(mask)
        return GridFunction(self.grid.subgrid(mask), self.space, self.values[mask])

    def zero_outside(self, mask):
        V = np.where(np.asarray(mask)[:, None], self.values, 0.0)
        return GridFunction(self.grid, self.space, V)

    def multiply(self, g):
        gv = g(self.grid.points()) if callable(g) else np.asarray(g)
        return GridFunction(self.grid, self.space, np.asarray(gv)[:, None] * self.values)

    def __add__(self, other):
        return GridFunction(self.grid, self.space, self.values + other.values)

    def __mul__(self, c):
        return GridFunction(self.grid, self.space, c * self.values)

    __rmul__ = __mul__

    def to_csv(self, path):
        n = self.space.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["coord", "mass"] + [f"re_{i + 1}" for i in range(n)] + [f"im_{i + 1}" for i in range(n)])
            for c, m, v in zip(self.grid.coords, self.grid.masses, self.values):
                w.writerow([repr(float(np.real(c))), repr(float(m))]
                           + [repr(float(x)) for x in v.real] + [repr(float(x)) for x in v.imag])

    @classmethod
    def from_csv(cls, path, space=None, tag="lebesgue-interval"):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        n = (len(head) - 2) // 2
        expect = ["coord", "mass"] + [f"re_{i + 1}" for i in range(n)] + [f"im_{i + 1}" for i in range(n)]
        if head != expect:
            raise ValueError("grid function CSV header mismatch")
        A = np.array(body, dtype=float).reshape(-1, 2 + 2 * n)
        space = space or SpaceDescriptor.lp(2, n)
        grid = MeasuredGrid(A[:, 0], A[:, 1], tag)
        return cls(grid, space, A[:, 2:2 + n] + 1j * A[:, 2 + n:])


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampler settings for gamma norms.

    ``method``: "auto" uses the exact Hilbert formula when the space is
    Hilbert and Monte Carlo otherwise; "montecarlo" and "exact" force one.
    """

    samples: int = 10000
    seed: int = 0
    law: str = "gaussian-real"
    method: str = "auto"

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass
class GammaEstimate:
    value: float
    stderr: float
    basis_size: int
    config: EstimatorConfig
    lower_bound: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def operator_norm_lower_bound(family: VectorFamily, iterations=8):
    """Lower estimate of ||I_f|| = sup_{|h|_2 <= 1} ||sum h_k y_k||.

    Alternates between the best coefficient vector for a fixed norming
    functional and the norming functional of the current sum.
    """
    Y = family.vectors
    if Y.shape[0] == 0:
        return 0.0
    space = family.space
    norms = family.norms()
    best = float(norms.max())
    if best == 0.0:
        return 0.0
    h = np.zeros(Y.shape[0], dtype=complex)
    h[int(np.argmax(norms))] = 1.0
    for _ in range(iterations):
        z = h @ Y
        xs = space.norming_functional(z)
        g = Y @ np.conj(xs)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        h = np.conj(g) / gn
        val = float(space.norm(h @ Y))
        if val <= best * (1 + 1e-14):
            best = max(best, val)
            break
        best = val
    return best


def gamma_norm_hilbert_exact(f: GridFunction) -> float:
    """(sum_k m_k ||v_k||^2)^{1/2}, valid when the space is Hilbert."""
    if not f.space.is_hilbert:
        raise NotHilbertError(f"{f.space} is not a Hilbert space")
    if f.grid.size == 0:
        return 0.0
    return float(np.sqrt(np.sum(f.grid.masses * f.pointwise_norms() ** 2)))


def gamma_norm(f: GridFunction, config: EstimatorConfig | None = None, lower_bound=True) -> GammaEstimate:
    config = config or EstimatorConfig()
    K = f.grid.size
    if K == 0:
        return GammaEstimate(0.0, 0.0, 0, config)
    method = config.method
    if method == "auto":
        method = "exact" if f.space.is_hilbert else "montecarlo"
    fam = f.family()
    if method == "exact":
        value, se = gamma_norm_hilbert_exact(f), 0.0
        lb = operator_norm_lower_bound(fam) if lower_bound else 0.0
    elif method == "montecarlo":
        avg = randomized_average(fam, 2.0, config.law, "montecarlo", config.samples, config.seed)
        value, se = avg.value, avg.stderr
        lb = operator_norm_lower_bound(fam) if lower_bound else 0.0
    else:
        raise ValueError(f"unknown method {config.method!r}")
    return GammaEstimate(value, se, K, config, lb, {"method": method})


def lp_norm(f: GridFunction, p) -> float:
    p = float(p)
    if f.grid.size == 0:
        return 0.0
    a = f.pointwise_norms()
    if p == math.inf:
        return float(a.max())
    return float(np.sum(f.grid.masses * a ** p) ** (1.0 / p))


# transforms on the line

@dataclass(frozen=True)
class Translate:
    h: float


@dataclass(frozen=True)
class Dilate:
    """(D_a f)(t) = f(a t); ``cells`` resamples onto a new uniform grid."""

    a: float
    fn: object = None
    cells: int | None = None


@dataclass(frozen=True)
class Fourier:
    pass


@dataclass(frozen=True)
class Convolve:
    kernel: object


def _require_line(f):
    if f.grid.tag != "lebesgue-interval":
        raise ValueError("transform requires a lebesgue-interval grid")


def translate(f: GridFunction, h) -> GridFunction:
    """g(t) = f(t + h): the cells move by -h with the same values."""
    _require_line(f)
    grid = MeasuredGrid(f.grid.coords - h, f.grid.masses, f.grid.tag)
    return GridFunction(grid, f.space, f.values)


def dilate(f: GridFunction, a, fn=None, cells=None) -> GridFunction:
    """g(t) = f(a t).

    Without ``fn`` the step function is dilated exactly (cells scaled by
    1/a). With a callable ``fn`` the dilated function is resampled at the
    midpoints of a uniform grid on the dilated support.
    """
    _require_line(f)
    if not a > 0:
        raise ValueError("dilation factor must be positive")
    if fn is None:
        grid = MeasuredGrid(f.grid.coords / a, f.grid.masses / a, f.grid.tag)
        return GridFunction(grid, f.space, f.values)
    c, m = f.grid.coords, f.grid.masses
    lo, hi = (c[0] - m[0] / 2) / a, (c[-1] + m[-1] / 2) / a
    grid = MeasuredGrid.uniform(lo, hi, cells or f.grid.size)
    return GridFunction.from_callable(grid, f.space, lambda t: fn(a * t))


def fourier(f: GridFunction) -> GridFunction:
    """Discrete Fourier transform F(f)(xi) = sum_k h e^{-2 pi i x_k xi} v_k.

    Frequencies xi_j = (j - K/2)/(K h) with cells of width 1/(K h); the map
    of the normalized coefficients is unitary.
    """
    _require_line(f)
    if not f.grid.is_uniform:
        raise ValueError("fourier requires a uniform grid")
    K = f.grid.size
    h = f.grid.spacing
    x0 = float(f.grid.coords[0])
    dxi = 1.0 / (K * h)
    xi = (np.arange(K) - K // 2) * dxi
    k = np.arange(K)
    phase = (-1.0) ** k if K % 2 == 0 else np.exp(2j * math.pi * k * (K // 2) / K)
    V = f.values * phase[:, None]
    F = np.fft.fft(V, axis=0)
    F = h * np.exp(-2j * math.pi * x0 * xi)[:, None] * F
    return GridFunction(MeasuredGrid(xi, np.full(K, dxi)), f.space, F)


def convolve(f: GridFunction, g) -> GridFunction:
    """(g * f)(x_i) = sum_k h g(x_i - x_k) v_k on a uniform grid.

    ``g`` is a callable scalar kernel or an array of kernel values at
    offsets (j - (len-1)/2) h for odd length.
    """
    _require_line(f)
    if not f.grid.is_uniform:
        raise ValueError("convolve requires a uniform grid")
    from scipy.signal import fftconvolve

    K = f.grid.size
    h = f.grid.spacing
    if callable(g):
        d = h * np.arange(-(K - 1), K)
        gv = np.asarray(g(d), dtype=complex)
    else:
        gv = np.asarray(g, dtype=complex)
        if gv.size % 2 == 0:
            raise ValueError("kernel array must have odd length")
    L = (gv.size - 1) // 2
    out = fftconvolve(f.values, h * gv[:, None], axes=0)
    out = out[L:L + K]
    return GridFunction(f.grid, f.space, out)


def kernel_l1(f: GridFunction, g) -> float:
    """Discrete L^1 norm of the kernel as used by ``convolve``."""
    h = f.grid.spacing
    if callable(g):
        d = h * np.arange(-(f.grid.size - 1), f.grid.size)
        gv = g(d)
    else:
        gv = g
    return float(h * np.sum(np.abs(gv)))


def transform(f: GridFunction, action) -> GridFunction:
    if isinstance(action, Translate):
        return translate(f, action.h)
    if isinstance(action, Dilate):
        return dilate(f, action.a, action.fn, action.cells)
    if isinstance(action, Fourier):
        return fourier(f)
    if isinstance(action, Convolve):
        return convolve(f, action.kernel)
    raise ValueError(f"unknown action {action!r}")


# derivatives and gamma^k

def finite_difference(f: GridFunction, order=1) -> GridFunction:
    """Second-order central differences (one-sided at the ends)."""
    if f.grid.tag == "planar-region":
        raise ValueError("finite differences need a 1-D grid")
    V = f.values
    t = f.grid.coords
    for _ in range(order):
        V = np.gradient(V, t, axis=0, edge_order=2)
        if f.grid.tag == "halfline-dt-over-t":
            raise ValueError("derivatives on log grids are not defined here")
    return GridFunction(f.grid, f.space, V)


def _derivative_values(f, grid, j):
    """j-th derivative of a holomorphic-like object on grid points."""
    pts = grid.points()
    if j == 0:
        V = f(pts)
    else:
        V = f.derivative(pts, j)
    V = np.asarray(V, dtype=complex)
    return V.reshape(grid.size, -1)


def gamma_k_norm(f, k, grid: MeasuredGrid | None = None, config: EstimatorConfig | None = None):
    """sum_{j<=k} ||f^{(j)}||_gamma.

    ``f`` is a GridFunction (finite differences) or an object with
    ``__call__``, ``derivative(points, order)`` and ``space`` evaluated on
    ``grid`` (Cauchy quadrature for holomorphic functions).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    total = 0.0
    var = 0.0
    for j in range(k + 1):
        if isinstance(f, GridFunction):
            fj = f if j == 0 else finite_difference(f, j)
        else:
            if grid is None:
                raise ValueError("a grid is needed for holomorphic input")
            fj = GridFunction(grid, f.space, _derivative_values(f, grid, j))
        est = gamma_norm(fj, config, lower_bound=False)
        total += est.value
        var += est.stderr ** 2
    size = f.grid.size if isinstance(f, GridFunction) else grid.size
    return GammaEstimate(total, math.sqrt(var), size, config or EstimatorConfig())


def _tol(se, scale):
    return 3.0 * se + 1e-9 * max(1.0, scale)


def interval_bounds_probe(f, a, b, cells=2000, config=None, sup_points=4001) -> ProbeResult:
    """Gamma norm of f on (a, b) against W^{1,1} and sup bounds.

    Checks
      ||f||_gamma <= (b-a)^{1/2} ||f(b)|| + (b-a)^{1/2} int ||f'||,
      sup ||f|| <= (b-a)^{-1/2} ||f||_gamma + (b-a)^{1/2} ||f'||_gamma.
    ``f`` must provide ``__call__``, ``derivative`` and ``space``.
    """
    if not b > a:
        raise ValueError("need a < b")
    if not hasattr(f, "derivative"):
        raise ValueError("derivative unavailable")
    config = config or EstimatorConfig()
    L = b - a
    grid = MeasuredGrid.uniform(a, b, cells)
    F0 = GridFunction(grid, f.space, _derivative_values(f, grid, 0))
    F1 = GridFunction(grid, f.space, _derivative_values(f, grid, 1))
    g0 = gamma_norm(F0, config, lower_bound=False)
    g1 = gamma_norm(F1, config.with_seed(config.seed + 1), lower_bound=False)
    fb = float(f.space.norm(np.asarray(f(np.array([b])), dtype=complex).reshape(-1)))
    int_fp = lp_norm(F1, 1)
    w11 = math.sqrt(L) * fb + math.sqrt(L) * int_fp
    ts = np.linspace(a, b, sup_points)
    sup = float(np.max(f.space.norm(np.asarray(f(ts), dtype=complex).reshape(ts.size, -1))))
    sup_bound = g0.value / math.sqrt(L) + math.sqrt(L) * g1.value
    se_sup = math.hypot(g0.stderr / math.sqrt(L), math.sqrt(L) * g1.stderr)
    # step-function gamma of a linear function is below the continuum value
    disc = (L / cells) * (int_fp + fb)
    ok1 = g0.value <= w11 + _tol(g0.stderr, w11) + disc
    ok2 = sup <= sup_bound + _tol(se_sup, sup_bound) + disc
    return ProbeResult(
        "interval-bounds", g0.value, w11, stderr=ratio_stderr(g0.value, w11, g0.stderr, 0.0),
        seed=config.seed, params={"a": a, "b": b, "cells": cells},
        quantities={"gamma": g0.value, "w11_bound": w11, "sup": sup, "sup_bound": sup_bound,
                    "gamma_derivative": g1.value, "sup_ratio": safe_ratio(sup, sup_bound)},
        holds=bool(ok1 and ok2), diagnostics={"w11_ok": ok1, "sup_ok": ok2},
    )


def _block_masks(f, blocks):
    K = f.grid.size
    masks = []
    for blk in blocks:
        blk = np.asarray(blk)
        if blk.dtype == bool:
            if blk.shape != (K,):
                raise ValueError("block mask has wrong length")
            masks.append(blk)
        else:
            m = np.zeros(K, dtype=bool)
            m[blk.astype(int)] = True
            masks.append(m)
    count = np.sum(masks, axis=0) if masks else np.zeros(K)
    if np.any(count > 1):
        raise ValueError("blocks overlap")
    return masks, count


def block_partition_probe(f: GridFunction, blocks, exponent, kind, config=None) -> ProbeResult:
    """Gamma norms over disjoint sub-grids against the whole grid.

    cotype-upper: lhs = (sum_n ||f||_{gamma(S_n)}^q)^{1/q}, rhs = ||f||_gamma.
    type-lower:   lhs = ||f||_gamma, rhs = (sum_n ||f||_{gamma(S_n)}^p)^{1/p}.
    """
    config = config or EstimatorConfig()
    masks, count = _block_masks(f, blocks)
    if kind == "type-lower" and np.any(count == 0):
        raise ValueError("type-lower blocks must cover the grid")
    if kind not in ("cotype-upper", "type-lower"):
        raise ValueError(f"unknown kind {kind!r}")
    whole = gamma_norm(f, config, lower_bound=False)
    parts = [gamma_norm(f.restrict(m), config.with_seed(config.seed + 1 + i), lower_bound=False)
             for i, m in enumerate(masks)]
    vals = np.array([p.value for p in parts])
    ses = np.array([p.stderr for p in parts])
    e = float(exponent)
    if e == math.inf:
        agg = float(vals.max()) if vals.size else 0.0
        agg_se = float(ses[np.argmax(vals)]) if vals.size else 0.0
    else:
        agg = float(np.sum(vals ** e) ** (1 / e))
        agg_se = float(np.sqrt(np.sum((vals ** (e - 1) * ses) ** 2)) / agg ** (e - 1)) if agg > 0 else 0.0
    if kind == "cotype-upper":
        lhs, rhs, sl, sr = agg, whole.value, agg_se, whole.stderr
    else:
        lhs, rhs, sl, sr = whole.value, agg, whole.stderr, agg_se
    return ProbeResult(
        f"block-{kind}", lhs, rhs, stderr=ratio_stderr(lhs, rhs, sl, sr), seed=config.seed,
        params={"kind": kind, "exponent": e, "blocks": len(masks)},
        quantities={"blocks": vals.tolist()},
        constants={"measured": safe_ratio(lhs, rhs)},
    )


def line_embedding_probe(f: GridFunction, p, q, config=None) -> ProbeResult:
    """gamma vs W^{1,p} and L^q vs gamma^1 on a line grid.

    Primary pair: (||f||_gamma, ||f||_p + ||f'||_p). The second pair
    (||f||_q, ||f||_gamma + ||f'||_gamma) is in ``quantities``.
    """
    config = config or EstimatorConfig()
    if not isinstance(f, GridFunction):
        raise ValueError("derivative unavailable: expected a GridFunction")
    df = finite_difference(f, 1)
    g0 = gamma_norm(f, config, lower_bound=False)
    g1 = gamma_norm(df, config.with_seed(config.seed + 1), lower_bound=False)
    w1p = lp_norm(f, p) + lp_norm(df, p)
    lq = lp_norm(f, q)
    g1sum = g0.value + g1.value
    return ProbeResult(
        "line-embedding", g0.value, w1p, stderr=ratio_stderr(g0.value, w1p, g0.stderr, 0.0),
        seed=config.seed, params={"p": float(p), "q": float(q), "cells": f.grid.size},
        quantities={"gamma": g0.value, "w1p": w1p, "lq": lq, "gamma1": g1sum,
                    "type_ratio": safe_ratio(g0.value, w1p), "cotype_ratio": safe_ratio(lq, g1sum)},
    )
