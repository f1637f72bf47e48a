"""Holomorphic symbols on sectors with decay certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def _certificate_constant(fn, angle, eps):
    """Sampled sup of |f(z)| (1 + |z|^{2 eps}) / |z|^eps on a sector, with 5% margin."""
    r = np.logspace(-8, 8, 801)
    th = np.linspace(-angle, angle, 41)
    Z = r[:, None] * np.exp(1j * th[None, :])
    with np.errstate(all="ignore"):
        v = np.abs(fn(Z)) * (1 + r[:, None] ** (2 * eps)) / r[:, None] ** eps
    v = v[np.isfinite(v)]
    return 1.05 * float(v.max())


@dataclass(frozen=True, eq=False)
class Symbol:
    """A bounded holomorphic function on the open sector of half-angle ``angle``.

    ``C, eps`` certify |f(z)| <= C |z|^eps / (1 + |z|^{2 eps}) on the sector
    of half-angle ``cert_angle``. Symbols with finite nonzero limits at 0 or
    infinity carry them in ``at_zero``/``at_inf``; the calculus handles those
    parts through the resolvent at -1.
    """

    name: str
    fn: Callable
    angle: float
    eps: float | None = None
    C: float | None = None
    at_zero: complex = 0.0
    at_inf: complex = 0.0
    params: dict = field(default_factory=dict)
    cert_angle: float | None = None

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))

    @property
    def is_hinf0(self):
        return self.eps is not None

    def reduced(self, z):
        """f minus its rational limit parts; decays at 0 and infinity."""
        z = np.asarray(z, dtype=complex)
        out = self.fn(z)
        if self.at_zero != 0 or self.at_inf != 0:
            with np.errstate(all="ignore"):
                out = out - self.at_zero / (1 + z) - self.at_inf * z / (1 + z)
        return out

    def bound(self, z):
        a = np.abs(z)
        return self.C * a ** self.eps / (1 + a ** (2 * self.eps))

    def check_certificate(self, samples=256, seed=0):
        """Spot-check the decay bound at random points of the certified sector."""
        if not self.is_hinf0:
            return False
        rng = np.random.default_rng(seed)
        r = np.exp(rng.uniform(-12, 12, samples))
        th = rng.uniform(-1, 1, samples) * self.cert_angle
        z = r * np.exp(1j * th)
        return bool(np.all(np.abs(self(z)) <= self.bound(z) * (1 + 1e-9)))

    def __mul__(self, other: "Symbol"):
        fa, fb = self.fn, other.fn
        angle = min(self.angle, other.angle)
        eps = None if (self.eps is None or other.eps is None) else min(self.eps, other.eps)
        return make_symbol(f"{self.name}*{other.name}", lambda z: fa(z) * fb(z), angle, eps,
                           self.at_zero * other.at_zero, self.at_inf * other.at_inf,
                           {"factors": [self.name, other.name]})


def make_symbol(name, fn, angle, eps, at_zero=0.0, at_inf=0.0, params=None):
    cert = 0.9 * min(angle, math.pi)
    C = _certificate_constant(fn, cert, eps) if eps is not None else None
    return Symbol(name, fn, float(angle), eps, C, at_zero, at_inf, params or {}, cert)


def symbol_w():
    """z (1 + z)^{-1}: limits 0 and 1, not decaying at infinity."""
    return make_symbol("w", lambda z: z / (1 + z), math.pi, None, 0.0, 1.0)


def symbol_v(theta):
    """z^{1 - theta} (1 + z)^{-1}."""
    theta = float(theta)
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    return make_symbol(f"v{theta:g}", lambda z: z ** (1 - theta) / (1 + z), math.pi,
                       min(theta, 1 - theta), params={"theta": theta})


def symbol_g(alpha):
    """z^alpha exp(-z^alpha); admissible on sectors of angle < pi/(2 alpha)."""
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")

    def fn(z):
        za = z ** alpha
        with np.errstate(all="ignore"):
            out = za * np.exp(-za)
        return np.where(np.isfinite(out), out, 0.0)

    return make_symbol(f"g{alpha:g}", fn, min(math.pi, math.pi / (2 * alpha)), alpha,
                       params={"alpha": alpha})


def symbol_q():
    """z (1 + z)^{-2}."""
    return make_symbol("q", lambda z: z / (1 + z) ** 2, math.pi, 1.0)


def _zero_order(c):
    c = np.trim_zeros(np.asarray(c, dtype=complex), "f")
    k = 0
    while k < len(c) and c[len(c) - 1 - k] == 0:
        k += 1
    return k


def rational_symbol(num, den, name="rational"):
    """num(z)/den(z), coefficients highest degree first."""
    num = np.trim_zeros(np.asarray(num, dtype=complex), "f")
    den = np.trim_zeros(np.asarray(den, dtype=complex), "f")
    if den.size == 0:
        raise ValueError("zero denominator")
    roots = np.roots(den)
    if roots.size and np.any((np.abs(np.angle(roots)) < 1e-12) & (np.abs(roots) > 0)):
        raise ValueError("denominator vanishes on the positive axis")
    nz = roots[np.abs(roots) > 0]
    angle = float(np.min(np.abs(np.angle(nz)))) if nz.size else math.pi
    angle = min(angle, math.pi)
    o0 = _zero_order(num) - _zero_order(den)
    oinf = (den.size - 1) - (num.size - 1)
    if o0 < 0 or oinf < 0:
        raise ValueError("rational symbol must stay bounded at 0 and infinity")
    eps = float(min(o0, oinf)) if (o0 > 0 and oinf > 0) else None
    at0 = 0.0 if o0 > 0 else complex(num[-1] / den[-1])
    atinf = 0.0 if oinf > 0 else complex(num[0] / den[0])
    pn, pd = np.poly1d(num), np.poly1d(den)
    return make_symbol(name, lambda z: pn(z) / pd(z), angle, eps, at0, atinf,
                       {"num": num, "den": den})


def parse_symbol(text) -> Symbol:
    """'q', 'w', 'v:0.25', 'g:0.5'."""
    head, _, arg = text.strip().partition(":")
    head = head.lower()
    if head == "q":
        return symbol_q()
    if head == "w":
        return symbol_w()
    if head == "v":
        return symbol_v(float(arg))
    if head == "g":
        return symbol_g(float(arg or 0.5))
    raise ValueError(f"unknown symbol {text!r}")
