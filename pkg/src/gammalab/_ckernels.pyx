# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: fused weighted row norms and Gray-code sign enumeration.

Complex data is read in place as interleaved (re, im) doubles. Norms are
accumulated from |z|^2 with precomputed weights, so no per-entry sqrt or
pow is needed for r in {2, 4, inf}.
"""
import numpy as np
from libc.math cimport sqrt, pow, fabs, fmax, INFINITY


cdef extern from *:
    int ctzll "__builtin_ctzll"(unsigned long long) nogil

# kinds: general r, r = 1, r = 2, r = 4, r = inf
DEF K_GEN = 0
DEF K_ONE = 1
DEF K_TWO = 2
DEF K_FOUR = 3
DEF K_INF = 4


cdef inline int _kind(double r):
    if r == 1.0:
        return K_ONE
    if r == 2.0:
        return K_TWO
    if r == 4.0:
        return K_FOUR
    if r == INFINITY:
        return K_INF
    return K_GEN


# power sums outside this range are recomputed on rescaled data
DEF SAFE_LO = 1e-200
DEF SAFE_HI = 1e200


cdef inline double _absmax(const double* z, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double mx = 0.0
    for k in range(2 * n):
        mx = fmax(mx, fabs(z[k]))
    return mx


cdef inline double _power_sum(const double* z, const double* w, Py_ssize_t n, double half_r,
                              int kind, double inv) noexcept nogil:
    """sum_k w_k |inv z_k|^r (max_k w_k |inv z_k|^2 for r = inf); z interleaved."""
    cdef Py_ssize_t k
    cdef double acc = 0.0, m, re, im
    for k in range(n):
        re = inv * z[2 * k]
        im = inv * z[2 * k + 1]
        m = re * re + im * im
        if kind == K_TWO:
            acc += w[k] * m
        elif kind == K_FOUR:
            acc += w[k] * m * m
        elif kind == K_ONE:
            acc += w[k] * sqrt(m)
        elif kind == K_INF:
            m = w[k] * m
            if m > acc:
                acc = m
        else:
            acc += w[k] * pow(m, half_r)
    return acc


cdef inline double _finish(double s, double r, int kind) noexcept nogil:
    if kind == K_ONE:
        return s
    if kind == K_TWO or kind == K_INF:
        return sqrt(s)
    if kind == K_FOUR:
        return sqrt(sqrt(s))
    return pow(s, 1.0 / r)


cdef inline double _scaled_sum(const double* z, const double* w, Py_ssize_t n, double r,
                               int kind, double* mx) noexcept nogil:
    """Power sum of z / mx; mx is 1 unless |z|^2 under- or overflowed."""
    cdef double acc = _power_sum(z, w, n, 0.5 * r, kind, 1.0)
    mx[0] = 1.0
    if SAFE_LO <= acc <= SAFE_HI:
        return acc
    cdef double big = _absmax(z, n)
    if big == 0.0:
        return 0.0
    mx[0] = big
    return _power_sum(z, w, n, 0.5 * r, kind, 1.0 / big)


cdef _weights(scale, double r, int kind, Py_ssize_t n):
    s = np.ascontiguousarray(scale, dtype=np.float64)
    if s.shape != (n,):
        raise ValueError(f"scale has shape {s.shape}, expected ({n},)")
    return np.ascontiguousarray(s * s if kind == K_INF else s ** r)


cdef const double[:, ::1] _interleaved(Z):
    Z = np.ascontiguousarray(Z, dtype=np.complex128)
    return Z.view(np.float64).reshape(Z.shape[0], 2 * Z.shape[1])


def row_norms(Z, scale, double r):
    Z = np.asarray(Z)
    cdef Py_ssize_t S = Z.shape[0], n = Z.shape[1], i
    out = np.zeros(S)
    if n == 0 or S == 0:
        return out
    cdef int kind = _kind(r)
    cdef const double[:, ::1] z = _interleaved(Z)
    cdef const double[::1] w = _weights(scale, r, kind, n)
    cdef double[::1] o = out
    cdef double mx
    with nogil:
        for i in range(S):
            o[i] = _finish(_scaled_sum(&z[i, 0], &w[0], n, r, kind, &mx), r, kind) * mx
    return out


def rademacher_exhaustive(X, scale, double r, double moment):
    """Exact E||sum eps_k x_k||^moment by Gray-code enumeration (eps_0 = +1)."""
    X = np.asarray(X, dtype=np.complex128)
    cdef Py_ssize_t N = X.shape[0], n = X.shape[1]
    if N == 0 or n == 0:
        return 0.0
    cdef int kind = _kind(r)
    cdef const double[:, ::1] x = _interleaved(X)
    cdef const double[::1] w = _weights(scale, r, kind, n)
    sum_arr = np.ascontiguousarray(X.sum(axis=0)).view(np.float64).copy()
    cdef double[::1] s = sum_arr
    eps_arr = np.ones(N)
    cdef double[::1] eps = eps_arr
    cdef int inf_moment = moment == INFINITY
    # E||.||^r needs no root when the moment equals the exponent
    cdef int raw = kind != K_INF and moment == r
    cdef unsigned long long total = 1ULL << (N - 1), step = 0
    cdef Py_ssize_t j, k
    cdef double acc = 0.0, best = 0.0, a, c, mx
    with nogil:
        while True:
            a = _scaled_sum(&s[0], &w[0], n, r, kind, &mx)
            if raw:
                acc += a if mx == 1.0 else a * pow(mx, r)
            else:
                a = _finish(a, r, kind) * mx
                if inf_moment:
                    if a > best:
                        best = a
                elif moment == 2.0:
                    acc += a * a
                else:
                    acc += pow(a, moment)
            step += 1
            if step >= total:
                break
            # Gray code: flip the sign of vector 1 + ctz(step)
            j = 1 + ctzll(step)
            c = -2.0 * eps[j]
            for k in range(2 * n):
                s[k] += c * x[j, k]
            eps[j] = -eps[j]
    if inf_moment:
        return best
    return acc / <double> total
