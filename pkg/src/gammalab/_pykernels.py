"""Numpy implementations of the hot kernels.

These mirror ``_ckernels`` exactly in semantics and are used when the
compiled module is unavailable or ``GAMMALAB_PURE_PYTHON=1`` is set.
"""
import numpy as np

_CHUNK = 1 << 14
# rows whose norm falls outside this range are recomputed on rescaled data
_SAFE = (1e-100, 1e100)


def row_norms(Z, scale, r):
    """Weighted l^r norm of every row of ``Z``."""
    scale = np.asarray(scale, dtype=float)
    if scale.shape != (np.shape(Z)[1],):
        raise ValueError(f"scale has shape {scale.shape}, expected ({np.shape(Z)[1]},)")
    A = np.abs(Z) * scale
    with np.errstate(over="ignore", under="ignore"):
        out = _row_norms(A, r)
    bad = ~((out >= _SAFE[0]) & (out <= _SAFE[1]))
    if np.any(bad):
        m = A[bad].max(axis=1) if A.shape[1] else np.zeros(0)
        m = np.where(m > 0, m, 1.0)
        out[bad] = _row_norms(A[bad] / m[:, None], r) * m
    return out


def _row_norms(A, r):
    if r == np.inf:
        return A.max(axis=1) if A.shape[1] else np.zeros(A.shape[0])
    if r == 2:
        return np.sqrt(np.einsum("ij,ij->i", A, A))
    if r == 1:
        return A.sum(axis=1)
    return np.power(np.power(A, r).sum(axis=1), 1.0 / r)


def _sign_block(start, stop, bits):
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    shifts = np.arange(bits, dtype=np.int64)[None, :]
    return 1.0 - 2.0 * ((idx >> shifts) & 1)


def rademacher_exhaustive(X, scale, r, moment, norm_fn=None):
    """Exact E||sum eps_k x_k||^moment over all sign patterns.

    The first sign is pinned to +1, which halves the work by the
    symmetry eps -> -eps. Returns the maximum when ``moment`` is inf.
    ``norm_fn`` overrides the weighted l^r row norm (product spaces).
    """
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    if N == 0:
        return 0.0
    total = 2 ** (N - 1)
    acc = 0.0
    best = 0.0
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        S = _sign_block(start, stop, N - 1)
        Z = X[0][None, :] + S @ X[1:]
        a = norm_fn(Z) if norm_fn is not None else row_norms(Z, scale, r)
        if moment == np.inf:
            best = max(best, float(a.max()))
        else:
            acc += float(np.power(a, moment).sum())
    if moment == np.inf:
        return best
    return acc / total
