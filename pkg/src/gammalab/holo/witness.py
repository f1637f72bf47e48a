"""Band-limited witness family built from shifted sinc functions.

phi_n(z) = 2 sin(2 pi z - c_n) / (2 pi z - c_n), c_n = 3 pi r^n, n = 1..N.
With F(g)(xi) = int e^{-2 pi i x xi} g(x) dx one has
    phi_n(t + i y) = F(e^{i c_n x + 2 pi y x} 1_{(-1,1)})(t),
so line norms of f = sum_n phi_n x_n follow from Gram matrices on (-1, 1).
Centers t_n = c_n / (2 pi) = 1.5 r^n are kept as exact integers 2 t_n.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..banach import SpaceDescriptor, gaussian_average_from_covariance, real_covariance
from ..gamma import EstimatorConfig, GammaEstimate
from .domains import StripDomain
from .functions import HoloFn

WINDOW = 64
PANEL = 0.5  # half period of |sin(2 pi t)|
PANEL_NODES = 12
GAP_NODES = 16
GAP_RATIO = 1.5
TAIL_FACTOR = 1e6


def _sinc(w):
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-6
    safe = np.where(small, 1.0, w)
    return np.where(small, 1 - w * w / 6, np.sin(safe) / safe)


@dataclass
class SincWitness:
    """The function z -> sum_n phi_n(z) x_n with centers 1.5 r^n."""

    N: int
    base: int = 2
    level: float = 0.0
    coefficients: np.ndarray | None = None
    space: SpaceDescriptor | None = None
    mode: str = "type"

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if int(self.base) != self.base or self.base < 2:
            raise ValueError("base must be an integer >= 2")
        self.base = int(self.base)
        if self.mode == "cotype" and self.base % 2:
            warnings.warn("odd base in cotype mode: the construction expects an even base", RuntimeWarning)
        if self.coefficients is None:
            n = self.N if self.space is None else self.space.dim
            self.coefficients = np.eye(self.N, n, dtype=complex)
        X = np.asarray(self.coefficients, dtype=complex)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] != self.N:
            raise ValueError("need one coefficient vector per witness")
        self.coefficients = X
        if self.space is None:
            self.space = SpaceDescriptor.lp(2, X.shape[1])
        if self.space.dim != X.shape[1]:
            raise ValueError("coefficient dimension does not match the space")
        self.two_t = [3 * self.base ** n for n in range(1, self.N + 1)]  # exact 2 t_n
        self.centers = np.array([v / 2 for v in self.two_t], dtype=float)
        self.frequencies = math.pi * np.array(self.two_t, dtype=float)  # c_n

    # pointwise evaluation
    def phi(self, z):
        """All phi_n(z); shape z.shape + (N,)."""
        z = np.asarray(z, dtype=complex)
        w = 2 * math.pi * (z[..., None] - self.centers)
        return 2 * _sinc(w)

    def __call__(self, z):
        return self.phi(z) @ self.coefficients

    def holo(self) -> HoloFn:
        return HoloFn(self.__call__, StripDomain(math.inf), self.space, name=f"sinc-witness-{self.N}")

    def boundary_values(self, n, t, level=None):
        """Closed form of phi_n(t + i level) (n is 1-based)."""
        level = self.level if level is None else level
        t = np.asarray(t, dtype=float)
        w = 2 * math.pi * (t + 1j * level - self.centers[n - 1])
        return 2 * _sinc(w)

    def numerical_transform(self, n, t, level=None, nodes=None):
        """Gauss-Legendre value of F(e^{i c_n x + 2 pi level x} 1_{(-1,1)})(t)."""
        level = self.level if level is None else level
        t = np.atleast_1d(np.asarray(t, dtype=float))
        freq = abs(self.frequencies[n - 1]) + 2 * math.pi * float(np.max(np.abs(t))) + 2 * math.pi * abs(level)
        K = nodes or int(max(64, 1.5 * freq + 40))
        x, w = np.polynomial.legendre.leggauss(K)
        ph = np.exp(1j * (self.frequencies[n - 1] * x) + 2 * math.pi * level * x)
        return (np.exp(-2j * math.pi * np.outer(t, x)) * ph) @ w

    # exact Gram data on a line
    def line_gram(self, level=None):
        """G_nm = int phi_n conj(phi_m), P_nm = int phi_n phi_m on Im z = level."""
        level = self.level if level is None else level
        beta = 4 * math.pi * level
        N = self.N
        G = np.empty((N, N), dtype=complex)
        for i in range(N):
            for j in range(N):
                d = self.two_t[i] - self.two_t[j]  # Delta = pi d, sin(Delta) = 0
                if d == 0:
                    G[i, j] = 2.0 if beta == 0 else 2 * math.sinh(beta) / beta
                else:
                    cos_d = -1.0 if d % 2 else 1.0
                    G[i, j] = 2 * math.sinh(beta) * cos_d / complex(beta, math.pi * d)
        P = 2.0 * np.eye(N)
        return G, P

    def line_gamma(self, level=None, config: EstimatorConfig | None = None) -> GammaEstimate:
        """gamma(R; X) norm of t -> f(t + i level)."""
        config = config or EstimatorConfig()
        G, P = self.line_gram(level)
        X = self.coefficients
        C = X.T @ G @ np.conj(X)
        Q = X.T @ P @ X
        method = config.method
        if method == "auto":
            method = "exact" if self.space.is_hilbert else "montecarlo"
        if method == "exact":
            if not self.space.is_hilbert:
                raise ValueError("exact gamma needs a Hilbert space")
            w = np.ones(self.space.dim) if self.space.weights is None else np.asarray(self.space.weights)
            val = math.sqrt(max(float(np.real(np.sum(w * np.diag(C)))), 0.0))
            return GammaEstimate(val, 0.0, self.N, config, diagnostics={"method": "exact"})
        R = real_covariance(C, Q if config.law == "gaussian-real" else None)
        avg = gaussian_average_from_covariance(self.space, R, 2.0, config.samples, config.seed, config.law)
        return GammaEstimate(avg.value, avg.stderr, self.N, config, diagnostics={"method": "montecarlo"})

    # L^q norms on a line
    def _local_values(self, anchor, u, level):
        """f(t_anchor + u + i level), evaluated in local coordinates."""
        w = 2 * math.pi * (np.asarray(u, dtype=float) + 1j * level)
        ta = self.two_t[anchor]
        D = np.array([math.pi * (ta - v) for v in self.two_t])
        sig = np.array([-1.0 if (ta - v) % 2 else 1.0 for v in self.two_t])
        arg = w[:, None] + D[None, :]
        s = np.sin(w)[:, None]
        phi = np.where(D[None, :] == 0, 2 * _sinc(arg), 2 * sig[None, :] * s / np.where(arg == 0, 1.0, arg))
        return phi @ self.coefficients

    def _residual(self, anchor, u, level):
        """R(u) with f = 2 sin(w) R away from every center."""
        w = 2 * math.pi * (np.asarray(u, dtype=float) + 1j * level)
        ta = self.two_t[anchor]
        D = np.array([math.pi * (ta - v) for v in self.two_t])
        sig = np.array([-1.0 if (ta - v) % 2 else 1.0 for v in self.two_t])
        return (sig[None, :] / (w[:, None] + D[None, :])) @ self.coefficients

    def _clusters(self, W):
        """Merged windows [t_m - W, t_m + W] as (first, last) center indices."""
        out = []
        start = 0
        for m in range(1, self.N):
            if self.two_t[m] - self.two_t[m - 1] > 4 * W:
                out.append((start, m - 1))
                start = m
        out.append((start, self.N - 1))
        return out

    @staticmethod
    def _sin_mean(q, level):
        """Mean of |2 sin(2 pi (u + i level))|^q over one period."""
        u = (np.arange(512) + 0.5) / 1024
        v = 2.0 * np.sqrt(np.sin(2 * math.pi * u) ** 2 + math.sinh(2 * math.pi * level) ** 2)
        return float(np.mean(v ** q))

    def _window_integral(self, lo_anchor, u_lo, u_hi, level, q):
        """int ||f||^q over local [u_lo, u_hi] of anchor (panels of width 1/2)."""
        x, w = np.polynomial.legendre.leggauss(PANEL_NODES)
        npan = int(round((u_hi - u_lo) / PANEL))
        edges = u_lo + PANEL * np.arange(npan)
        pts = (edges[:, None] + PANEL * (x[None, :] + 1) / 2).ravel()
        wts = np.tile(w * PANEL / 2, npan)
        total = 0.0
        if q == math.inf:
            return self._window_sup(lo_anchor, pts, level)
        for chunk in range(0, pts.size, 8192):
            p = pts[chunk:chunk + 8192]
            nv = np.atleast_1d(self.space.norm(self._local_values(lo_anchor, p, level)))
            total += float(np.sum(wts[chunk:chunk + 8192] * nv ** q))
        return total

    def _window_sup(self, anchor, pts, level):
        """Max of ||f|| over the window: best node, then a bounded local refinement."""
        best_u, best = 0.0, 0.0
        for chunk in range(0, pts.size, 8192):
            p = pts[chunk:chunk + 8192]
            nv = np.atleast_1d(self.space.norm(self._local_values(anchor, p, level)))
            k = int(np.argmax(nv))
            if nv[k] > best:
                best_u, best = float(p[k]), float(nv[k])
        step = PANEL / PANEL_NODES
        res = minimize_scalar(
            lambda u: -float(np.atleast_1d(self.space.norm(self._local_values(anchor, np.array([u]), level)))[0]),
            bounds=(best_u - step, best_u + step), method="bounded", options={"xatol": 1e-10})
        return max(best, -float(res.fun))

    def _gap_integral(self, anchor, u_from, u_to, level, q, mean_sin):
        """Averaged int |2 sin|^q ||R||^q between two distances from ``anchor``.

        u_from, u_to share a sign; geometric panels grow away from the anchor.
        """
        sgn = 1.0 if u_to > 0 else -1.0
        a, b = sorted((abs(u_from), abs(u_to)))
        if b <= a:
            return 0.0, 0.0
        x, w = np.polynomial.legendre.leggauss(GAP_NODES)
        edges = [a]
        while edges[-1] < b:
            edges.append(min(b, edges[-1] * GAP_RATIO))
        edges = np.array(edges)
        lo, hi = edges[:-1], edges[1:]
        pts = (lo[:, None] + (hi - lo)[:, None] * (x[None, :] + 1) / 2).ravel()
        wts = ((hi - lo)[:, None] * w[None, :] / 2).ravel()
        nv = np.atleast_1d(self.space.norm(self._residual(anchor, sgn * pts, level)))
        if q == math.inf:
            return 0.0, float(nv.max()) * 2 * math.cosh(2 * math.pi * level)
        return mean_sin * float(np.sum(wts * nv ** q)), 0.0

    def line_lq(self, level=None, q=2.0, window=WINDOW):
        """L^q(R; X) norm of t -> f(t + i level) by local quadrature."""
        level = self.level if level is None else level
        q = float(q)
        s_inf = np.atleast_1d(self.space.norm(self.coefficients.sum(axis=0)[None, :]))[0]
        if q <= 1.0:
            return math.inf if s_inf > 0 else self._lq_compact(level, q, window)
        return self._lq_compact(level, q, window)

    def _lq_compact(self, level, q, W):
        mean_sin = self._sin_mean(q, level) if q != math.inf else 0.0
        clusters = self._clusters(W)
        total = 0.0
        sup = 0.0
        # windows, each cluster integrated relative to its first center
        for (i0, i1) in clusters:
            hi_local = (self.two_t[i1] - self.two_t[i0]) / 2 + W
            v = self._window_integral(i0, -W, hi_local, level, q)
            if q == math.inf:
                sup = max(sup, v)
            else:
                total += v
        # gaps between clusters, split at a half-period-aligned midpoint
        for (a0, a1), (b0, _) in zip(clusters[:-1], clusters[1:]):
            G = (self.two_t[b0] - self.two_t[a1]) / 2 - 2 * W
            H = 0.5 * math.floor(G)
            i1, s1 = self._gap_integral(a1, W, W + H, level, q, mean_sin)
            i2, s2 = self._gap_integral(b0, -(W + G - H), -W, level, q, mean_sin)
            total += i1 + i2
            sup = max(sup, s1, s2)
        # tails
        D = TAIL_FACTOR * (self.centers[-1] + W)
        first, last = clusters[0][0], clusters[-1][1]
        i1, s1 = self._gap_integral(first, -D, -W, level, q, mean_sin)
        i2, s2 = self._gap_integral(last, W, D, level, q, mean_sin)
        total += i1 + i2
        sup = max(sup, s1, s2)
        if q == math.inf:
            return sup
        s_inf = float(np.atleast_1d(self.space.norm(self.coefficients.sum(axis=0)[None, :]))[0])
        far = mean_sin * s_inf ** q * (2 * math.pi) ** (-q) * D ** (1 - q) / (q - 1)
        total += 2 * far
        return total ** (1.0 / q)


def sinc_witness(N, base=2, level=0.0, coefficients=None, space=None, mode="type") -> SincWitness:
    return SincWitness(N, base, level, coefficients, space, mode)
