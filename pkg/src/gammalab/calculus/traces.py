"""g-function traces t -> f(tA)x and the Littlewood-Paley-Stein probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from ..banach import SpaceDescriptor
from ..gamma import EstimatorConfig, GridFunction, MeasuredGrid, gamma_norm, lp_norm
from ..probes import ProbeResult, safe_ratio
from .dunford import contour_apply
from .operators import SectorialOperator, as_operator
from .symbols import Symbol, make_symbol

GRID_TOL = 1e-8
ENDPOINT_TOL = 1e-6
DEFAULT_POINTS = 256
S_SPAN = 700.0  # |log t| range scanned for calibration integrals


class GridTooNarrowError(ValueError):
    """Trace has not decayed at the ends of the log-grid."""


def default_log_grid(op: SectorialOperator, f: Symbol, points=DEFAULT_POINTS, tol=GRID_TOL):
    """dt/t grid on which |f(t lambda)| <= tol at both ends for every eigenvalue."""
    if not f.is_hinf0:
        raise ValueError(f"symbol {f.name} has no decay certificate")
    lmin, lmax = op.spectral_bounds()
    span = math.log(f.C / tol) / f.eps
    return MeasuredGrid.halfline(math.exp(-span) / lmax, math.exp(span) / lmin, points)


@dataclass(eq=False)
class GFunctionTrace:
    operator: SectorialOperator
    symbol: Symbol
    x: np.ndarray
    grid: MeasuredGrid
    values: np.ndarray  # (T, n) or (T, n, B)
    params: dict = field(default_factory=dict)

    @property
    def t(self):
        return self.grid.points()

    def function(self, space: SpaceDescriptor, column=None) -> GridFunction:
        V = self.values if column is None else self.values[:, :, column]
        return GridFunction(self.grid, space, V.reshape(self.grid.size, -1))

    def lp_norm(self, space, p, column=None):
        return lp_norm(self.function(space, column), p)

    def gamma_norm(self, space, config=None, column=None):
        return gamma_norm(self.function(space, column), config, lower_bound=False)


def g_trace(A, f: Symbol, x, grid: MeasuredGrid | None = None, points=DEFAULT_POINTS,
            nu=None, endpoint_tol=ENDPOINT_TOL) -> GFunctionTrace:
    """f(tA)x on a log-spaced grid; ``x`` may hold several columns."""
    op = as_operator(A)
    grid = grid or default_log_grid(op, f, points)
    if grid.tag != "halfline-dt-over-t":
        raise ValueError("trace grid must carry the dt/t measure")
    x = np.asarray(x, dtype=complex)
    V = contour_apply(op, f, x, grid.points(), nu)
    xn = np.linalg.norm(x.reshape(x.shape[0], -1), axis=0)
    ends = np.linalg.norm(V[[0, -1]].reshape(2, op.n, -1), axis=1)
    if np.any(ends > endpoint_tol * np.maximum(xn, 1e-300)):
        raise GridTooNarrowError("trace has not decayed at the grid ends; widen the grid")
    return GFunctionTrace(op, f, x, grid, V, {"shift": op.shift})


def _lps_result(space, x, Lq, Lp, p, q, params, quantities=None):
    xn = float(space.norm(x))
    qd = {"Lq": Lq, "x_norm": xn, "Lp": Lp, "upper_ratio": safe_ratio(Lq, xn),
          "lower_ratio": safe_ratio(xn, Lp), "trace_over_x_p": safe_ratio(Lp, xn)}
    qd.update(quantities or {})
    res = ProbeResult("calculus.lps", Lq, xn, params={**params, "p": p, "q": q}, quantities=qd)
    res.holds = bool(math.isfinite(res.ratio) and math.isfinite(qd["lower_ratio"]))
    return res


def lps_sweep(A, f: Symbol, xs, space: SpaceDescriptor, p=None, q=None, grid=None,
              points=DEFAULT_POINTS, with_gamma=False, config: EstimatorConfig | None = None):
    """LPS probes for each column of ``xs`` with one shared contour pass."""
    op = as_operator(A)
    p = space.type_exponent if p is None else float(p)
    q = space.cotype_exponent if q is None else float(q)
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.shape[0] != op.n or space.dim != op.n:
        raise ValueError("operator, space and vectors must share one dimension")
    tr = g_trace(op, f, xs, grid, points)
    params = {"symbol": f.name, "operator": op.name, "space": str(space), "points": tr.grid.size,
              "shift": op.shift}
    out = []
    for b in range(xs.shape[1]):
        fn = tr.function(space, b)
        extra = {}
        if with_gamma:
            g = gamma_norm(fn, config, lower_bound=False)
            extra = {"gamma": g.value, "gamma_stderr": g.stderr}
        out.append(_lps_result(space, xs[:, b], lp_norm(fn, q), lp_norm(fn, p), p, q, params, extra))
    return out


def lps_probe(A, f: Symbol, x, space: SpaceDescriptor, p=None, q=None, grid=None,
              points=DEFAULT_POINTS, with_gamma=False, config=None) -> ProbeResult:
    """(||trace||_{L^q(dt/t)}, ||x||, ||trace||_{L^p(dt/t)}) for one vector."""
    x = np.asarray(x, dtype=complex)
    if not np.any(x):
        p = space.type_exponent if p is None else float(p)
        q = space.cotype_exponent if q is None else float(q)
        return _lps_result(space, x, 0.0, 0.0, p, q, {"symbol": f.name})
    return lps_sweep(A, f, x[:, None], space, p, q, grid, points, with_gamma, config)[0]


def _log_integral(fn, f: Symbol, h=0.02, tol=1e-20):
    """Trapezoid rule in s = log t for int_0^inf fn(t) dt/t."""
    s = np.arange(-S_SPAN, S_SPAN + h / 2, h)
    v = fn(np.exp(s))
    a = np.abs(v)
    keep = np.nonzero(a >= tol * a.max())[0]
    if keep[0] == 0 or keep[-1] == s.size - 1:
        raise ValueError(f"calibration integral for {f.name} does not converge")
    return h * v.sum()


def calibration_integral(f: Symbol, h=0.02):
    """int_0^inf |f(t)|^2 dt/t."""
    if not f.is_hinf0:
        raise ValueError(f"calibration integral for {f.name} diverges")
    with np.errstate(all="ignore"):
        return float(np.real(_log_integral(lambda t: np.nan_to_num(np.abs(f(t)) ** 2), f, h)))


def calibrated_dual(f: Symbol, h=0.02) -> Symbol:
    """g(z) = c conj(f(conj z)) with c such that int f g dt/t = 1."""
    I = calibration_integral(f, h)
    if I == 0.0:
        raise ValueError("symbol vanishes on the positive axis")
    c = 1.0 / I
    fn = f.fn
    g = make_symbol(f"dual({f.name})", lambda z: c * np.conj(fn(np.conj(z))), f.angle, f.eps,
                    np.conj(f.at_zero) * c, np.conj(f.at_inf) * c, {"c": c, "calibration": I})
    return g


def reproducing_integral(f: Symbol, g: Symbol):
    """int_0^inf f(t) g(t) dt/t by adaptive quadrature in log t."""
    def prod(s):
        with np.errstate(all="ignore"):
            t = np.exp(min(s, S_SPAN))
            v = complex(f(t) * g(t))
        return v if np.isfinite(v) else 0j

    def part(fun):
        return quad(fun, -np.inf, np.inf, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    return complex(part(lambda s: prod(s).real), part(lambda s: prod(s).imag))
