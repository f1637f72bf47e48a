"""Derivatives of holomorphic functions by trapezoidal Cauchy integrals."""
from __future__ import annotations

import math

import numpy as np

from .domains import DomainError


def default_radius(domain, a):
    """Half the distance to the boundary, or 1 for unbounded distance."""
    d = np.asarray(domain.distance_to_boundary(a), dtype=float)
    return np.where(np.isfinite(d), 0.5 * d, 1.0)


def cauchy_derivative(f, a, n, radius=None, nodes=64):
    """n-th derivative of ``f`` at the points ``a``.

    Evaluates f^{(n)}(a) = n!/rho^n * mean_k f(a + rho w_k) w_k^{-n},
    w_k = e^{2 pi i k/K}, which is the trapezoid rule for Cauchy's
    integral on the circle |z - a| = rho.
    """
    if n < 0:
        raise ValueError("derivative order must be >= 0")
    a = np.asarray(a, dtype=complex)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    rho = default_radius(f.domain, a) if radius is None else np.broadcast_to(
        np.asarray(radius, dtype=float), a.shape)
    if np.any(rho <= 0):
        raise DomainError("contour radius must be positive")
    dist = np.asarray(f.domain.distance_to_boundary(a), dtype=float)
    if np.any(~(rho < dist)):
        raise DomainError("closed contour disk leaves the domain")
    if n == 0:
        out = f(a)
        return out[0] if scalar else out
    K = int(nodes)
    w = np.exp(2j * math.pi * np.arange(K) / K)
    Z = a[..., None] + rho[..., None] * w
    V = f(Z)  # (..., K, dim)
    weights = w ** (-n) / K
    out = np.einsum("...kd,k->...d", V, weights) * (math.factorial(n) / rho ** n)[..., None]
    return out[0] if scalar else out
