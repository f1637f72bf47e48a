"""Diffusion generators on finite state spaces and the tensor-extension probe."""
from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm, null_space

from ..banach import SpaceDescriptor
from ..gamma import MeasuredGrid
from ..probes import ProbeResult, safe_ratio
from .operators import SectorialOperator
from .symbols import Symbol
from .traces import DEFAULT_POINTS, default_log_grid, g_trace

CHECK_TIMES = np.logspace(-3, 3, 13)


class NotDiffusionError(ValueError):
    """exp(-tQ) fails positivity or contractivity."""


def check_diffusion(Q, times=CHECK_TIMES, tol=1e-10):
    """Entrywise positivity and l^1/l^inf contractivity of exp(-tQ).

    Row and column sums <= 1 give contractivity on every l^r by interpolation.
    """
    Q = np.asarray(Q)
    if np.iscomplexobj(Q) and np.any(np.abs(Q.imag) > tol):
        raise NotDiffusionError("generator must be real")
    Q = np.real(Q)
    worst = {"min_entry": math.inf, "max_row_sum": 0.0, "max_col_sum": 0.0}
    for t in times:
        S = expm(-t * Q)
        worst["min_entry"] = min(worst["min_entry"], float(S.min()))
        worst["max_row_sum"] = max(worst["max_row_sum"], float(S.sum(axis=1).max()))
        worst["max_col_sum"] = max(worst["max_col_sum"], float(S.sum(axis=0).max()))
    if worst["min_entry"] < -tol:
        raise NotDiffusionError(f"semigroup not positive (min entry {worst['min_entry']:.3g})")
    if worst["max_row_sum"] > 1 + tol or worst["max_col_sum"] > 1 + tol:
        raise NotDiffusionError("semigroup not contractive")
    return worst


def kernel_projection(Q, tol=1e-10):
    """Spectral projection onto ker Q along its range, or None if Q is injective."""
    Q = np.asarray(Q, dtype=complex)
    R = null_space(Q, rcond=tol)
    if R.shape[1] == 0:
        return None
    L = null_space(Q.conj().T, rcond=tol)
    G = L.conj().T @ R
    if np.linalg.cond(G) > 1e10:
        raise NotDiffusionError("zero eigenvalue is not semisimple")
    return R @ np.linalg.solve(G, L.conj().T)


def _mixed_norm(values, space, tmass, masses, r, p):
    """l^r over states of L^p(dt/t; X) norms; values (T, states, d)."""
    per_state = np.empty(values.shape[1])
    for k in range(values.shape[1]):
        a = np.atleast_1d(space.norm(values[:, k, :]))
        per_state[k] = a.max() if p == math.inf else np.sum(tmass * a ** p) ** (1 / p)
    return _lr(per_state, masses, r)


def _lr(a, masses, r):
    if r == math.inf:
        return float(a.max()) if a.size else 0.0
    return float(np.sum(masses * a ** r) ** (1 / r))


def diffusion_extend_probe(Q, space: SpaceDescriptor, r, f: Symbol, x, p=None, q=None, masses=None,
                           grid: MeasuredGrid | None = None, points=DEFAULT_POINTS) -> ProbeResult:
    """Mixed norms of t -> f(t Q (x) I)x in L^r(states; L^q(dt/t; X)).

    ``x`` has one row per state. A kernel of Q is projected out first.
    """
    Q = np.asarray(Q, dtype=complex)
    check_diffusion(Q)
    m = Q.shape[0]
    x = np.asarray(x, dtype=complex).reshape(m, -1)
    if x.shape[1] != space.dim:
        raise ValueError("state values must live in the given space")
    r = float(r)
    p = space.type_exponent if p is None else float(p)
    q = space.cotype_exponent if q is None else float(q)
    masses = np.ones(m) if masses is None else np.asarray(masses, dtype=float)
    P = kernel_projection(Q)
    projected = P is not None
    if projected:
        x = x - P @ x
    op = SectorialOperator.certify(Q, shift=0.0, name="diffusion")
    grid = grid or default_log_grid(op, f, points)
    tr = g_trace(op, f, x, grid)
    Lq = _mixed_norm(tr.values, space, grid.masses, masses, r, q)
    Lp = _mixed_norm(tr.values, space, grid.masses, masses, r, p)
    xn = _lr(np.atleast_1d(space.norm(x)), masses, r)
    res = ProbeResult(
        "calculus.diffusion", Lq, xn,
        params={"symbol": f.name, "space": str(space), "r": r, "p": p, "q": q, "states": m,
                "kernel_projection": projected, "assumes": "UMD"},
        quantities={"Lq": Lq, "x_norm": xn, "Lp": Lp, "upper_ratio": safe_ratio(Lq, xn),
                    "lower_ratio": safe_ratio(xn, Lp)},
    )
    res.holds = bool(math.isfinite(res.ratio) and math.isfinite(res.quantities["lower_ratio"]))
    return res
