"""Contour-integral functional calculus and fractional powers."""
from __future__ import annotations

import math

import numpy as np

from .operators import SectorialOperator, as_operator
from .symbols import Symbol

CONTOUR_TOL = 1e-14
MIN_NODES = 200
S_LIMIT = 300.0
CHUNK = 256


class ContourError(ValueError):
    """Contour angle out of order or truncation tail above tolerance."""


def default_angle(op: SectorialOperator, f: Symbol):
    return 0.5 * (op.angle + min(f.angle, math.pi))


def _check_angle(op, f, nu):
    if not op.angle < nu < min(f.angle, math.pi):
        raise ContourError(f"need spectral angle {op.angle:.4f} < nu={nu:.4f} < symbol angle {f.angle:.4f}")


def _s_range(op, f, nu, scales, tol):
    """Smallest s-window holding every integrand above tol * peak, for all scales."""
    s = np.arange(-S_LIMIT, S_LIMIT + 1e-9, 0.05)
    z = np.exp(s + 1j * nu)
    inv = op.inverse_norm()
    near0 = np.minimum(1.0, np.abs(z) * inv) if math.isfinite(inv) else np.ones_like(s)
    lo, hi = math.inf, -math.inf
    for t in np.atleast_1d(scales):
        with np.errstate(all="ignore"):
            a = np.maximum(np.abs(f.reduced(t * z)), np.abs(f.reduced(t * np.conj(z))))
        a = np.where(np.isfinite(a), a, 0.0) * near0
        peak = a.max()
        if peak == 0.0:
            continue
        keep = np.nonzero(a >= tol * peak)[0]
        if keep[0] == 0 or keep[-1] == s.size - 1:
            raise ContourError("truncation tail above tolerance; symbol decays too slowly")
        lo = min(lo, s[keep[0]] - 0.05)
        hi = max(hi, s[keep[-1]] + 0.05)
    if lo > hi:
        return None
    return lo, hi


def contour_nodes(op, f, nu, scales=(1.0,), nodes=None, tol=CONTOUR_TOL):
    """Trapezoid nodes s_k (shared by both rays) and step h."""
    rng = _s_range(op, f, nu, scales, tol)
    if rng is None:
        return np.zeros(0), 0.0
    lo, hi = rng
    d = min(nu - op.angle, min(f.angle, math.pi) - nu)
    h_need = 2 * math.pi * d / math.log(1.0 / tol)
    n = max(nodes or MIN_NODES, int(math.ceil((hi - lo) / h_need)) + 1)
    s = np.linspace(lo, hi, n)
    return s, float(s[1] - s[0])


def _rational_parts(op, f, X, scales):
    """at_zero (1 + tA)^{-1} X + at_inf tA (1 + tA)^{-1} X per scale."""
    A = op.effective
    n = op.n
    out = np.zeros((len(scales), n, X.shape[1]), dtype=complex)
    if f.at_zero == 0 and f.at_inf == 0:
        return out
    B = X.shape[1]
    AX = A @ X
    for i, t in enumerate(scales):
        # tA(1+tA)^{-1}X solved directly; X - (1+tA)^{-1}X cancels for small t
        Y = np.linalg.solve(np.eye(n) + t * A, np.hstack([X, t * AX]))
        out[i] = f.at_zero * Y[:, :B] + f.at_inf * Y[:, B:]
    return out


def contour_apply(A, f: Symbol, X, scales=(1.0,), nu=None, nodes=None, tol=CONTOUR_TOL):
    """f(t A) X for every t in ``scales``; shape (len(scales), n, B).

    Two rays z = e^{s +- i nu}, trapezoid rule in s. Resolvent solves are
    shared across scales since only the scalar weights f(t z) change.
    """
    op = as_operator(A)
    nu = default_angle(op, f) if nu is None else float(nu)
    _check_angle(op, f, nu)
    X = np.asarray(X, dtype=complex)
    vec = X.ndim == 1
    if vec:
        X = X[:, None]
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    out = _rational_parts(op, f, X, scales)
    s, h = contour_nodes(op, f, nu, scales, nodes, tol)
    M = op.effective
    n, B = X.shape
    for sign in (-1.0, 1.0):
        for c in range(0, s.size, CHUNK):
            z = np.exp(s[c:c + CHUNK] + 1j * sign * nu)
            RX = np.linalg.solve(z[:, None, None] * np.eye(n) - M[None], np.broadcast_to(X, (z.size, n, B)))
            with np.errstate(all="ignore"):
                W = f.reduced(scales[:, None] * z[None, :]) * z[None, :]
            W = np.where(np.isfinite(W), W, 0.0) * (-sign * h / (2j * math.pi))
            out += (W @ RX.reshape(z.size, n * B)).reshape(len(scales), n, B)
    return out[:, :, 0] if vec else out


def symbol_apply(A, f: Symbol, nu=None, nodes=None, tol=CONTOUR_TOL, scale=1.0):
    """Matrix f(scale * A) by the contour integral."""
    op = as_operator(A)
    return contour_apply(op, f, np.eye(op.n), [scale], nu, nodes, tol)[0]


def diagonal_oracle(A, f: Symbol):
    """V f(Lambda) V^{-1}; reference for diagonalizable A."""
    op = as_operator(A)
    lam, V = np.linalg.eig(op.effective)
    return V @ np.diag(f(lam)) @ np.linalg.inv(V)


def fractional_power(A, theta, method="auto", tol=1e-15):
    """Principal power A^theta.

    method "eig" diagonalizes; "integral" uses
    A^phi = sin(pi phi)/pi int_R e^{phi u} A (e^u + A)^{-1} du, 0 < phi < 1,
    with the integer part of theta split off.
    """
    M = A.effective if isinstance(A, SectorialOperator) else np.asarray(A, dtype=complex)
    theta = float(theta)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    lam = np.linalg.eigvals(M)
    top = float(np.abs(lam).max()) if lam.size else 0.0
    nz = lam[np.abs(lam) > 1e-12 * max(top, 1e-300)]
    if np.any(np.abs(np.angle(nz)) > math.pi - 1e-9):
        raise ValueError("eigenvalue on the negative axis: branch is ambiguous")
    n = M.shape[0]
    if method == "auto":
        w, V = np.linalg.eig(M)
        method = "eig" if np.linalg.cond(V) < 1e8 else "integral"
    if method == "eig":
        w, V = np.linalg.eig(M)
        return V @ np.diag(np.power(w.astype(complex), theta)) @ np.linalg.inv(V)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")
    k = int(math.floor(theta))
    phi = theta - k
    P = np.linalg.matrix_power(M, k) if k else np.eye(n, dtype=complex)
    if phi == 0.0:
        return P
    omega = float(np.max(np.abs(np.angle(nz)))) if nz.size else 0.0
    lmin = float(np.abs(nz).min())
    lo = math.log(lmin) + math.log(tol) / phi
    hi = math.log(top) - math.log(tol) / (1 - phi)
    h = 2 * math.pi * (math.pi - omega) / math.log(1.0 / tol)
    u = np.linspace(lo, hi, int(math.ceil((hi - lo) / h)) + 1)
    h = u[1] - u[0]
    acc = np.zeros((n, n), dtype=complex)
    for c in range(0, u.size, CHUNK):
        e = np.exp(u[c:c + CHUNK])
        R = np.linalg.solve(e[:, None, None] * np.eye(n) + M[None], np.broadcast_to(M, (e.size, n, n)))
        acc += np.tensordot(np.exp(phi * u[c:c + CHUNK]), R, axes=1)
    return (math.sin(math.pi * phi) / math.pi) * h * acc @ P
