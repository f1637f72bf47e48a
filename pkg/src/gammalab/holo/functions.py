"""Holomorphic X-valued functions with declared domains."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..banach import SpaceDescriptor
from .cauchy import cauchy_derivative
from .domains import DomainError, SectorDomain, StripDomain


@dataclass(frozen=True)
class DecayCertificate:
    """Pointwise decay bound.

    kind "sector":       ||f(z)|| <= C |z|^eps / (1 + |z|^{2 eps})
    kind "strip-gauss":  ||f(t+iy)|| <= C exp(-eps t^2)
    kind "strip-exp":    ||f(t+iy)|| <= C exp(-eps |t|)
    kind "strip-power":  ||f(t+iy)|| <= C (1 + |t|)^{-eps}
    """

    C: float
    eps: float
    kind: str = "sector"

    def bound(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "sector":
            r = np.abs(z)
            return self.C * r ** self.eps / (1 + r ** (2 * self.eps))
        t = np.abs(z.real)
        if self.kind == "strip-gauss":
            return self.C * np.exp(-self.eps * t ** 2)
        if self.kind == "strip-exp":
            return self.C * np.exp(-self.eps * t)
        if self.kind == "strip-power":
            return self.C * (1 + t) ** (-self.eps)
        raise ValueError(f"unknown certificate kind {self.kind!r}")

    def lattice_tail(self, N):
        """Upper bound of (sum_{|n| > N} bound(n)^2)^{1/2} on a strip."""
        n = np.arange(N + 1, N + 200001, dtype=float)
        if self.kind == "strip-power":
            head = np.sum(self.bound(n) ** 2)
            M = N + 200000
            rest = self.C ** 2 * (1 + M) ** (1 - 2 * self.eps) / (2 * self.eps - 1) if self.eps > 0.5 else math.inf
            return math.sqrt(2 * (head + rest))
        if self.kind == "sector":
            raise ValueError("sector certificates do not bound lattice tails")
        return math.sqrt(2 * float(np.sum(self.bound(n) ** 2)))


@dataclass(frozen=True, eq=False)
class HoloFn:
    """z -> X-vector on a strip or sector.

    ``evaluator`` maps a complex array of any shape to shape (..., dim).
    ``derivative_fn(z, order)`` may supply exact derivatives; otherwise
    Cauchy quadrature is used.
    """

    evaluator: Callable
    domain: StripDomain | SectorDomain
    space: SpaceDescriptor
    decay: DecayCertificate | None = None
    derivative_fn: Callable | None = None
    name: str = ""

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.domain.contains(z)):
            raise DomainError(f"{self.name or 'function'} evaluated outside {self.domain}")
        out = np.asarray(self.evaluator(z), dtype=complex)
        if out.shape != z.shape + (self.space.dim,):
            out = np.broadcast_to(out, z.shape + (self.space.dim,))
        return out

    def derivative(self, z, order=1, radius=None, nodes=64):
        if order == 0:
            return self(z)
        if self.derivative_fn is not None:
            z = np.asarray(z, dtype=complex)
            if not np.all(self.domain.contains(z)):
                raise DomainError("derivative requested outside the domain")
            res = self.derivative_fn(z, order)
            if res is not None:
                return np.broadcast_to(np.asarray(res, dtype=complex), z.shape + (self.space.dim,))
        return cauchy_derivative(self, z, order, radius=radius, nodes=nodes)

    def check_decay(self, samples=64, seed=0, rtol=1e-9):
        """Spot-check the certificate at random points of the domain."""
        if self.decay is None:
            return True
        rng = np.random.default_rng(seed)
        if isinstance(self.domain, SectorDomain):
            r = np.exp(rng.uniform(-6, 6, samples))
            th = rng.uniform(-1, 1, samples) * self.domain.angle * 0.999
            z = r * np.exp(1j * th)
        else:
            w = min(self.domain.half_width, 50.0) * 0.999
            z = rng.uniform(-20, 20, samples) + 1j * rng.uniform(-w, w, samples)
        vals = np.atleast_1d(self.space.norm(self(z)))
        return bool(np.all(vals <= self.decay.bound(z) * (1 + rtol) + 1e-300))

    def restrict(self, domain):
        return HoloFn(self.evaluator, domain, self.space, self.decay, self.derivative_fn, self.name)

    @classmethod
    def scalar(cls, h, x, domain, space=None, dh=None, decay=None, name=""):
        """h(z) x for a scalar holomorphic ``h``; ``dh(z, order)`` optional."""
        x = np.asarray(x, dtype=complex).ravel()
        space = space or SpaceDescriptor.lp(2, x.size)

        def ev(z):
            return np.asarray(h(z), dtype=complex)[..., None] * x

        dfn = None
        if dh is not None:
            def dfn(z, order):
                r = dh(z, order)
                return None if r is None else np.asarray(r, dtype=complex)[..., None] * x
        return cls(ev, domain, space, decay, dfn, name)


def gaussian_fn(x, space=None, alpha=1.0):
    """e^{-z^2} x on the strip of half-width ``alpha``."""
    x = np.asarray(x, dtype=complex)
    space = space or SpaceDescriptor.lp(2, x.size)
    nx = space.norm(x)

    def dh(z, order):
        if order == 1:
            return -2 * z * np.exp(-z ** 2)
        if order == 2:
            return (4 * z ** 2 - 2) * np.exp(-z ** 2)
        return None

    cert = DecayCertificate(nx * math.exp(alpha ** 2), 1.0, "strip-gauss") if math.isfinite(alpha) else None
    return HoloFn.scalar(lambda z: np.exp(-z ** 2), x, StripDomain(alpha), space, dh, cert, "gaussian")


def sech_fn(x, space=None, alpha=1.2):
    """sech(z) x on a strip of half-width alpha < pi/2."""
    if not 0 < alpha < math.pi / 2:
        raise ValueError("sech needs alpha < pi/2")
    x = np.asarray(x, dtype=complex)
    space = space or SpaceDescriptor.lp(2, x.size)
    C = max(2.0 / (1 - math.exp(-2.0)), math.e / math.cos(alpha)) * space.norm(x)

    def dh(z, order):
        if order == 1:
            return -np.tanh(z) / np.cosh(z)
        return None

    return HoloFn.scalar(lambda z: 1 / np.cosh(z), x, StripDomain(alpha), space, dh,
                         DecayCertificate(C, 1.0, "strip-exp"), "sech")


def rational_fn(x, space=None, alpha=1.0):
    """x / (z^2 + 4) on a strip of half-width alpha < 2."""
    if not 0 < alpha < 2:
        raise ValueError("rational decay needs alpha < 2")
    x = np.asarray(x, dtype=complex)
    space = space or SpaceDescriptor.lp(2, x.size)
    c = 2.0 / min(1.0, 4 - alpha ** 2)  # (1+|t|)^2 <= 2 (1 + t^2)

    def dh(z, order):
        if order == 1:
            return -2 * z / (z ** 2 + 4) ** 2
        return None

    return HoloFn.scalar(lambda z: 1 / (z ** 2 + 4), x, StripDomain(alpha), space, dh,
                         DecayCertificate(c * space.norm(x), 2.0, "strip-power"), "rational")


def map_strip_sector(f: HoloFn, direction="sector_to_strip") -> HoloFn:
    """Transfer along the exponential map.

    ``sector_to_strip``: g(z) = f(e^z) on the strip of the same width.
    ``strip_to_sector``: g(w) = f(log w) on the sector of the same angle.
    Measures transfer as dt/t <-> ds.
    """
    if direction == "sector_to_strip":
        if not isinstance(f.domain, SectorDomain):
            raise ValueError("sector_to_strip needs a sector function")
        return HoloFn(lambda z: f.evaluator(np.exp(z)), StripDomain(f.domain.angle), f.space,
                      None, None, f"{f.name}.exp" if f.name else "")
    if direction == "strip_to_sector":
        if not isinstance(f.domain, StripDomain):
            raise ValueError("strip_to_sector needs a strip function")
        if not f.domain.half_width < math.pi:
            raise ValueError("sector angle must be < pi")
        return HoloFn(lambda w: f.evaluator(np.log(w)), SectorDomain(f.domain.half_width), f.space,
                      None, None, f"{f.name}.log" if f.name else "")
    raise ValueError(f"unknown direction {direction!r}")
