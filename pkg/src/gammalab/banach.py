"""Finite-dimensional Banach spaces and randomized norm averages.

Spaces are weighted l^r spaces and finite l^s-products of them. Vectors
are complex coordinate arrays; batches carry the coordinates on the last
axis. Gaussian and Rademacher averages ``(E||sum xi_k x_k||^m)^{1/m}`` are
estimated by seeded Monte Carlo or, for signs, by exact enumeration.
"""
from __future__ import annotations

import math
import os
from functools import cached_property
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .probes import ProbeResult, ratio_stderr, safe_ratio

LAWS = ("gaussian-real", "gaussian-complex", "rademacher")
MODES = ("montecarlo", "exhaustive")
EXHAUSTIVE_MAX_N = 20
CHUNK = 1024


def conjugate_exponent(r):
    r = float(r)
    if r == 1.0:
        return math.inf
    if r == math.inf:
        return 1.0
    return r / (r - 1.0)


def _scale_from_weights(w, r):
    w = np.asarray(w, dtype=float)
    return w.copy() if r == math.inf else w ** (1.0 / r)


def _weights_from_scale(s, r):
    s = np.asarray(s, dtype=float)
    return s.copy() if r == math.inf else s ** r


def _lp_norming(u, r):
    """Unit dual vector u* with sum u conj(u*) = ||u||_r (unweighted)."""
    a = np.abs(u)
    nrm = kernels.row_norms(u[None, :], np.ones(u.size), r)[0] if u.size else 0.0
    if nrm == 0.0:
        return np.zeros_like(u)
    with np.errstate(invalid="ignore", divide="ignore"):
        sgn = np.where(a > 0, u / np.where(a > 0, a, 1.0), 0.0)
    if r == math.inf:
        out = np.zeros_like(u)
        k = int(np.argmax(a))
        out[k] = sgn[k]
        return out
    if r == 1.0:
        return sgn.astype(complex)
    return sgn * (a / nrm) ** (r - 1.0)


@dataclass(frozen=True)
class SpaceDescriptor:
    """A finite-dimensional Banach space.

    ``kind`` is ``"lp"``, ``"weighted-lp"`` or ``"product"``. Weighted norms
    are ``(sum_k w_k |v_k|^r)^{1/r}`` (``max_k w_k |v_k|`` for r = inf).
    Products carry the ``exponent`` as outer exponent over component norms,
    optionally weighted by ``weights``.
    """

    kind: str
    exponent: float
    dim: int
    weights: tuple | None = None
    components: tuple = ()

    def __post_init__(self):
        r = float(self.exponent)
        object.__setattr__(self, "exponent", r)
        if not r >= 1.0:
            raise ValueError(f"exponent must be >= 1, got {r}")
        if self.kind not in ("lp", "weighted-lp", "product"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "product":
            if not self.components:
                raise ValueError("product needs at least one component")
            d = sum(c.dim for c in self.components)
            object.__setattr__(self, "dim", d)
        if int(self.dim) < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            m = len(self.components) if self.kind == "product" else self.dim
            if len(w) != m:
                raise ValueError("weights length mismatch")
            if not all(x > 0 and math.isfinite(x) for x in w):
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", w)

    # construction helpers
    @classmethod
    def lp(cls, r, n):
        return cls("lp", r, n)

    @classmethod
    def weighted_lp(cls, r, weights):
        weights = tuple(weights)
        return cls("weighted-lp", r, len(weights), weights)

    @classmethod
    def product(cls, components, outer=2.0, weights=None):
        components = tuple(components)
        return cls("product", outer, sum(c.dim for c in components),
                   None if weights is None else tuple(weights), components)

    @classmethod
    def power(cls, component, m, outer=None, weights=None):
        """``l^outer_m(component)``; outer defaults to the component exponent."""
        outer = component.exponent if outer is None else outer
        return cls.product([component] * m, outer, weights)

    # properties
    @property
    def scale(self):
        if self.kind == "product":
            raise TypeError("scale is defined for l^r kinds only")
        if self.weights is None:
            return np.ones(self.dim)
        return _scale_from_weights(self.weights, self.exponent)

    @property
    def outer_scale(self):
        m = len(self.components)
        if self.weights is None:
            return np.ones(m)
        return _scale_from_weights(self.weights, self.exponent)

    @property
    def is_hilbert(self):
        if self.kind == "product":
            return self.exponent == 2.0 and all(c.is_hilbert for c in self.components)
        return self.exponent == 2.0

    @property
    def type_exponent(self):
        """Best type of the l^r scale: min(r, 2), and 1 at r = inf."""
        if self.kind == "product":
            return min([c.type_exponent for c in self.components] + [_type_of(self.exponent)])
        return _type_of(self.exponent)

    @property
    def cotype_exponent(self):
        """Best cotype of the l^r scale: max(r, 2), inf at r = inf."""
        if self.kind == "product":
            return max([c.cotype_exponent for c in self.components] + [_cotype_of(self.exponent)])
        return _cotype_of(self.exponent)

    def __str__(self):
        r = "inf" if self.exponent == math.inf else f"{self.exponent:g}"
        if self.kind == "lp":
            return f"lp:{r}:{self.dim}"
        if self.kind == "weighted-lp":
            return f"wlp:{r}:" + ",".join(f"{w:g}" for w in self.weights)
        c0 = self.components[0]
        if self.weights is None and all(c == c0 for c in self.components):
            if c0.kind == "lp" and c0.exponent == self.exponent:
                return f"lp:{r}:{c0.dim}^{len(self.components)}"
            return f"prod:{r}[{c0}^{len(self.components)}]"
        return f"prod:{r}[" + ";".join(str(c) for c in self.components) + "]"

    def _offsets(self):
        return np.cumsum([0] + [c.dim for c in self.components])

    @cached_property
    def _homogeneous(self):
        # l^s_m(X) with a single l^r component type: vectorized norm path
        if self.kind != "product":
            return None
        c0 = self.components[0]
        if c0.kind == "product" or any(c != c0 for c in self.components[1:]):
            return None
        return c0

    # norms
    def norm(self, v):
        """Norm of ``v``; batched over all leading axes."""
        v = np.asarray(v)
        if v.shape[-1:] != (self.dim,):
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {v.shape[-1:]}")
        lead = v.shape[:-1]
        V = v.reshape(-1, self.dim)
        if self.kind == "product":
            c0 = self._homogeneous
            m = len(self.components)
            if c0 is not None:
                inner = kernels.row_norms(V.reshape(-1, c0.dim), c0.scale, c0.exponent)
                parts = inner.reshape(-1, m)
            else:
                off = self._offsets()
                parts = np.stack([c.norm(V[:, off[i]:off[i + 1]])
                                  for i, c in enumerate(self.components)], axis=1)
            out = kernels.row_norms(parts, self.outer_scale, self.exponent)
        else:
            out = kernels.row_norms(V, self.scale, self.exponent)
        out = np.asarray(out).reshape(lead)
        return float(out) if out.ndim == 0 else out

    def dual(self):
        """Dual space under the pairing sum_k v_k conj(w_k)."""
        rp = conjugate_exponent(self.exponent)
        if self.kind == "product":
            comps = tuple(c.dual() for c in self.components)
            w = None
            if self.weights is not None:
                w = tuple(_weights_from_scale(1.0 / self.outer_scale, rp))
            return SpaceDescriptor("product", rp, self.dim, w, comps)
        if self.weights is None:
            return SpaceDescriptor("lp", rp, self.dim)
        w = _weights_from_scale(1.0 / self.scale, rp)
        return SpaceDescriptor("weighted-lp", rp, self.dim, tuple(w))

    def norming_functional(self, z):
        """Dual vector x* of dual norm one with pairing(z, x*) = ||z||."""
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        if self.kind == "product":
            off = self._offsets()
            s = self.outer_scale
            norms = np.array([c.norm(z[off[i]:off[i + 1]]) for i, c in enumerate(self.components)])
            a = _lp_norming((s * norms).astype(complex), self.exponent).real
            out = np.zeros(self.dim, dtype=complex)
            for i, c in enumerate(self.components):
                if a[i] != 0.0:
                    out[off[i]:off[i + 1]] = s[i] * a[i] * c.norming_functional(z[off[i]:off[i + 1]])
            return out
        s = self.scale
        return s * _lp_norming(s * z, self.exponent)

    def standard_basis(self, N=None):
        N = self.dim if N is None else N
        I = np.eye(self.dim, dtype=complex)
        return VectorFamily(self, I[np.arange(N) % self.dim])


def _type_of(r):
    return 1.0 if r == math.inf else min(r, 2.0)


def _cotype_of(r):
    return math.inf if r == math.inf else max(r, 2.0)


def parse_space(text):
    """Parse ``lp:r:n``, ``wlp:r:w1,w2,...`` or ``lp:r:n^m`` (l^r_m(l^r_n))."""
    try:
        parts = text.strip().split(":")
        kind = parts[0].lower()
        r = math.inf if parts[1] in ("inf", "oo") else float(parts[1])
        if kind == "lp":
            if "^" in parts[2]:
                n, m = parts[2].split("^")
                return SpaceDescriptor.power(SpaceDescriptor.lp(r, int(n)), int(m))
            return SpaceDescriptor.lp(r, int(parts[2]))
        if kind == "wlp":
            return SpaceDescriptor.weighted_lp(r, [float(x) for x in parts[2].split(",")])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"cannot parse space descriptor {text!r}: {exc}") from None
    raise ValueError(f"unknown space descriptor {text!r}")


def norm(space: SpaceDescriptor, v):
    return space.norm(v)


def dual(space: SpaceDescriptor):
    return space.dual()


def dual_pairing(space: SpaceDescriptor, v, w):
    """sum_k v_k conj(w_k) between ``space`` and its dual."""
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != (space.dim,) or w.shape != (space.dim,):
        raise ValueError("dimension mismatch")
    return complex(np.sum(v * np.conj(w)))


@dataclass
class VectorFamily:
    """Ordered vectors x_1..x_N of one space, stored as an (N, dim) array."""

    space: SpaceDescriptor
    vectors: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=complex)
        if V.size == 0:
            V = V.reshape(0, self.space.dim)
        if V.ndim == 1:
            V = V.reshape(1, -1)
        if V.ndim != 2 or V.shape[1] != self.space.dim:
            raise ValueError(f"vectors must have dimension {self.space.dim}")
        self.vectors = V

    def __len__(self):
        return self.vectors.shape[0]

    def scaled(self, c):
        return VectorFamily(self.space, c * self.vectors)

    def norms(self):
        if len(self) == 0:
            return np.zeros(0)
        return np.atleast_1d(self.space.norm(self.vectors))


@dataclass
class RandomizedAverage:
    value: float
    stderr: float
    samples: int
    law: str
    moment: float
    seed: int | None
    mode: str = "montecarlo"
    diagnostics: dict = field(default_factory=dict)


def _threads():
    try:
        return max(1, int(os.environ.get("GAMMALAB_THREADS", "1")))
    except ValueError:
        return 1


def _chunked(samples, seed, draw_norms):
    """Norms from ``draw_norms(rng, m)`` over fixed-size chunks.

    Each chunk gets its own child of SeedSequence(seed), so the output is
    independent of the number of worker threads.
    """
    sizes = [min(CHUNK, samples - s) for s in range(0, samples, CHUNK)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def work(i):
        return draw_norms(np.random.default_rng(children[i]), sizes[i])

    nthreads = min(_threads(), len(sizes))
    if nthreads > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            parts = list(ex.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    return np.concatenate(parts) if parts else np.zeros(0)


def moment_estimate(a, moment):
    """(mean a^m)^{1/m} with jackknife standard error; max for m = inf."""
    a = np.asarray(a, dtype=float)
    S = a.size
    if S == 0:
        return 0.0, 0.0
    if moment == math.inf:
        return float(a.max()), 0.0
    am = a ** moment
    A = am.mean()
    value = A ** (1.0 / moment)
    if S < 2 or A == 0.0:
        return float(value), 0.0
    loo = np.maximum((S * A - am) / (S - 1), 0.0) ** (1.0 / moment)
    se = math.sqrt((S - 1) / S * float(np.sum((loo - loo.mean()) ** 2)))
    return float(value), se


def _psd_sqrt(R):
    mu, U = np.linalg.eigh(R)
    return (U * np.sqrt(np.clip(mu, 0.0, None))) @ U.T


def real_covariance(C, Q=None):
    """Covariance of [Re Z, Im Z] from E[Z Z^H] = C and E[Z Z^T] = Q."""
    C = np.asarray(C, dtype=complex)
    Q = np.zeros_like(C) if Q is None else np.asarray(Q, dtype=complex)
    top = np.hstack([(C + Q).real, (Q - C).imag])
    bot = np.hstack([(Q - C).imag.T, (C - Q).real])
    return 0.5 * np.vstack([top, bot])


def gaussian_average_from_covariance(space, R, moment=2.0, samples=10000, seed=0, law="gaussian-real"):
    """Average of ||Z|| for a centered Gaussian Z with real covariance R (2n x 2n)."""
    n = space.dim
    root = _psd_sqrt(0.5 * (R + R.T))

    def draw(rng, m):
        W = rng.standard_normal((m, 2 * n)) @ root
        return np.atleast_1d(space.norm(W[:, :n] + 1j * W[:, n:]))

    a = _chunked(samples, seed, draw)
    value, se = moment_estimate(a, moment)
    return RandomizedAverage(value, se, samples, law, moment, seed, "montecarlo",
                             {"path": "covariance"})


def randomized_average(family: VectorFamily, moment=2.0, law="gaussian-real", mode="montecarlo",
                       samples=10000, seed=0, method="auto") -> RandomizedAverage:
    """Estimate (E||sum_k xi_k x_k||^moment)^{1/moment}.

    ``method`` selects the Gaussian sampler: ``"direct"`` draws one
    coefficient per vector, ``"covariance"`` draws from the 2*dim real
    covariance of the sum; ``"auto"`` picks the cheaper one.
    """
    if law not in LAWS:
        raise ValueError(f"unknown law {law!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    moment = float(moment)
    if not moment > 0:
        raise ValueError("moment must be positive")
    space = family.space
    Y = family.vectors
    N, n = Y.shape
    if mode == "exhaustive":
        if law != "rademacher":
            raise ValueError("exhaustive mode requires the rademacher law")
        if N > EXHAUSTIVE_MAX_N:
            raise ValueError(f"exhaustive mode supports N <= {EXHAUSTIVE_MAX_N}")
    if N == 0:
        return RandomizedAverage(0.0, 0.0, 0 if mode == "exhaustive" else samples, law, moment, seed, mode)

    if mode == "exhaustive":
        if space.kind == "product":
            m = kernels.rademacher_exhaustive(Y, None, space.exponent, moment, norm_fn=space.norm)
        else:
            m = kernels.rademacher_exhaustive(Y, space.scale, space.exponent, moment)
        value = m if moment == math.inf else m ** (1.0 / moment)
        return RandomizedAverage(float(value), 0.0, 2 ** N, law, moment, seed, mode)

    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be >= 1")

    if law == "rademacher":
        def draw(rng, m):
            E = 2.0 * rng.integers(0, 2, size=(m, N)) - 1.0
            return np.atleast_1d(space.norm(E @ Y))
        a = _chunked(samples, seed, draw)
        value, se = moment_estimate(a, moment)
        return RandomizedAverage(value, se, samples, law, moment, seed, mode, {"path": "direct"})

    if law == "gaussian-complex":
        Y = np.vstack([Y, 1j * Y]) / math.sqrt(2.0)
    if method == "auto":
        method = "covariance" if Y.shape[0] >= 2 * n else "direct"
    if method == "covariance":
        Yr = np.hstack([Y.real, Y.imag])
        res = gaussian_average_from_covariance(space, Yr.T @ Yr, moment, samples, seed, law)
        return res
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")

    def draw(rng, m):
        return np.atleast_1d(space.norm(rng.standard_normal((m, Y.shape[0])) @ Y))

    a = _chunked(samples, seed, draw)
    value, se = moment_estimate(a, moment)
    return RandomizedAverage(value, se, samples, law, moment, seed, mode, {"path": "direct"})


def _auto_mode(N, mode):
    if mode == "auto":
        return "exhaustive" if N <= EXHAUSTIVE_MAX_N else "montecarlo"
    return mode


def type_cotype_probe(family: VectorFamily, exponent, kind, mode="auto", samples=10000, seed=0) -> ProbeResult:
    """Ratio of the Rademacher average to the l^p sum of norms.

    type p: ratio = avg_p / (sum ||x_n||^p)^{1/p}.
    cotype q: ratio = (sum ||x_n||^q)^{1/q} / avg_q; for q = inf the left
    side is max ||x_n|| and the average uses the second moment.
    """
    exponent = float(exponent)
    if kind == "type":
        if not 1.0 <= exponent <= 2.0:
            raise ValueError("type exponent must lie in [1, 2]")
    elif kind == "cotype":
        if not exponent >= 2.0:
            raise ValueError("cotype exponent must lie in [2, inf]")
    else:
        raise ValueError(f"unknown kind {kind!r}")
    N = len(family)
    if N == 0:
        raise ValueError("empty family")
    mode = _auto_mode(N, mode)
    mom = 2.0 if exponent == math.inf else exponent
    avg = randomized_average(family, mom, "rademacher", mode, samples, seed)
    norms = family.norms()
    if exponent == math.inf:
        ell = float(norms.max())
    else:
        ell = float(np.sum(norms ** exponent) ** (1.0 / exponent))
    if kind == "type":
        lhs, rhs, se_l, se_r = avg.value, ell, avg.stderr, 0.0
    else:
        lhs, rhs, se_l, se_r = ell, avg.value, 0.0, avg.stderr
    return ProbeResult(
        probe_id=f"{kind}-constant",
        lhs=lhs, rhs=rhs, ratio=safe_ratio(lhs, rhs),
        stderr=ratio_stderr(lhs, rhs, se_l, se_r),
        seed=seed,
        params={"kind": kind, "exponent": exponent, "N": N, "space": str(family.space), "mode": mode},
        quantities={"average": avg.value, "ell_sum": ell},
    )


def witness_search(space: SpaceDescriptor, kind, exponent, N, budget=100, seed=0,
                   mode="auto", samples=4000):
    """Heuristic search for a family maximizing the type/cotype ratio.

    Starts from the standard basis, then alternates random restarts with
    single-coordinate perturbations of the incumbent. All evaluations share
    one sampling seed so that MC comparisons use common random numbers.
    Returns ``(family, ProbeResult)``; the ratio never decreases in budget.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    complex_ok = True

    def score(fam):
        return type_cotype_probe(fam, exponent, kind, mode=mode, samples=samples, seed=seed)

    best = space.standard_basis(N)
    best_res = score(best)
    history = [best_res.ratio]
    step = 0.5
    for it in range(1, budget):
        if it % 10 == 1 or best_res.ratio == 0.0:
            V = rng.standard_normal((N, space.dim))
            if complex_ok and rng.random() < 0.5:
                V = V + 1j * rng.standard_normal((N, space.dim))
            if rng.random() < 0.5:
                V = np.sign(V.real) + 0j
        else:
            V = best.vectors.copy()
            i = rng.integers(N)
            k = rng.integers(space.dim)
            V[i, k] += step * (rng.standard_normal() + (1j * rng.standard_normal() if complex_ok else 0))
        cand = VectorFamily(space, V)
        if not np.all(np.isfinite(V)) or np.all(cand.norms() == 0):
            history.append(best_res.ratio)
            continue
        res = score(cand)
        if res.ratio > best_res.ratio:
            best, best_res = cand, res
            step = min(2.0, step * 1.2)
        else:
            step = max(1e-3, step * 0.98)
        history.append(best_res.ratio)
    best_res.probe_id = f"{kind}-witness-search"
    best_res.params.update({"budget": int(budget)})
    best_res.diagnostics["history"] = history
    return best, best_res
