"""Type and cotype characterization probes on strips and sectors.

type(p):   sum_j ||f(. + i j a)||_gamma   against  sum_j ||f(. + i j b)||_{L^p}
cotype(q): sum_j ||f(. + i j a)||_{L^q}   against  sum_j ||f(. + i j b)||_gamma
with j = +1, -1. On a sector, lines become rays t e^{i j a} with measure dt/t.
"""
from __future__ import annotations

import math

import numpy as np

from ..gamma import EstimatorConfig, GridFunction, MeasuredGrid, gamma_norm, lp_norm
from ..probes import ProbeResult, ratio_stderr
from .domains import DomainError, SectorDomain, StripDomain
from .witness import SincWitness

KINDS = ("type", "cotype")
GEOMETRIES = ("strip", "sector")


def _check(kind, exponent, geometry, a, b, f):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if geometry not in GEOMETRIES:
        raise ValueError(f"geometry must be one of {GEOMETRIES}")
    exponent = float(exponent)
    if kind == "type" and not 1.0 <= exponent <= 2.0:
        raise ValueError("type exponent must lie in [1, 2]")
    if kind == "cotype" and exponent < 2.0:
        raise ValueError("cotype exponent must be >= 2")
    if not 0 <= a < b:
        raise DomainError("need 0 <= a < b")
    if geometry == "sector" and b >= math.pi:
        raise DomainError("sector levels must stay below pi")
    if not isinstance(f, SincWitness):
        dom = f.domain
        bound = dom.half_width if isinstance(dom, StripDomain) else dom.angle
        if b >= bound:
            raise DomainError(f"level {b} outside the domain {dom}")
        if geometry == "strip" and not isinstance(dom, StripDomain):
            raise DomainError("strip geometry needs a strip function")
        if geometry == "sector" and not isinstance(dom, SectorDomain):
            raise DomainError("sector geometry needs a sector function")
    return exponent


class _Lines:
    """Norms of a generic function along the boundary curves at one level."""

    def __init__(self, f, geometry, T, cells):
        self.f = f
        if geometry == "strip":
            self.grid = MeasuredGrid.uniform(-T, T, cells)
            self.curve = lambda y: self.grid.coords + 1j * y
        else:
            self.grid = MeasuredGrid.halfline(math.exp(-T), math.exp(T), cells)
            self.curve = lambda y: np.exp(self.grid.coords + 1j * y)

    def fn(self, y):
        v = np.asarray(self.f(self.curve(y)), dtype=complex).reshape(self.grid.size, -1)
        return GridFunction(self.grid, self.f.space, v)

    def gamma(self, y, config):
        g = gamma_norm(self.fn(y), config, lower_bound=False)
        return g.value, g.stderr

    def lq(self, y, q):
        return lp_norm(self.fn(y), q), 0.0


class _WitnessLines:
    def __init__(self, w):
        self.w = w

    def gamma(self, y, config):
        g = self.w.line_gamma(y, config)
        return g.value, g.stderr

    def lq(self, y, q):
        return self.w.line_lq(y, q), 0.0


def theorem_probe(f, kind="type", exponent=2.0, geometry="strip", a=0.0, b=0.25,
                  config: EstimatorConfig | None = None, T=8.0, cells=384) -> ProbeResult:
    """Both sides of the type or cotype characterization for f.

    ``f`` is a HoloFn or a SincWitness. A witness is a strip function; its
    sector version f(log w) has identical line norms, so both geometries
    reuse the analytic line computation.
    """
    config = config or EstimatorConfig()
    exponent = _check(kind, exponent, geometry, a, b, f)
    lines = _WitnessLines(f) if isinstance(f, SincWitness) else _Lines(f, geometry, T, cells)
    inner = [a, -a]
    outer = [b, -b]
    if kind == "type":
        g = [lines.gamma(y, config) for y in inner]
        n = [lines.lq(y, exponent) for y in outer]
        names = ("gamma_inner", f"L{exponent:g}_outer")
    else:
        n = [lines.lq(y, exponent) for y in inner]
        g = [lines.gamma(y, config) for y in outer]
        names = (f"L{exponent:g}_inner", "gamma_outer")
    gsum = sum(v for v, _ in g)
    gse = math.sqrt(sum(s * s for _, s in g))
    nsum = sum(v for v, _ in n)
    if kind == "type":
        lhs, rhs, se_l, se_r = gsum, nsum, gse, 0.0
    else:
        lhs, rhs, se_l, se_r = nsum, gsum, 0.0, gse
    res = ProbeResult(
        probe_id=f"holo.theorem.{kind}",
        lhs=lhs,
        rhs=rhs,
        seed=config.seed,
        params={"kind": kind, "exponent": exponent, "geometry": geometry, "a": a, "b": b,
                "space": str(f.space), "samples": config.samples, "law": config.law,
                "N": getattr(f, "N", None)},
        quantities={names[0]: [v for v, _ in (g if kind == "type" else n)],
                    names[1]: [v for v, _ in (n if kind == "type" else g)]},
    )
    res.stderr = ratio_stderr(lhs, rhs, se_l, se_r)
    res.holds = bool(math.isfinite(res.ratio))
    return res
