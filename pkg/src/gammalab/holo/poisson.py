"""Harmonic extension into a strip from its two boundary lines.

The strip {|Im z| < b} is mapped to {0 < Im w < 1} by w = (z + ib)/(2b).
There the bottom and top Poisson kernels are
    P0(u, eta) = sin(pi eta) / (2 (cosh(pi u) - cos(pi eta))),   mass 1 - eta,
    P1(u, eta) = sin(pi eta) / (2 (cosh(pi u) + cos(pi eta))),   mass eta.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from ..gamma import GridFunction

TAIL_MASS = 1e-10


def _level(y, b):
    if not b > 0:
        raise ValueError("b must be positive")
    if not abs(y) < b:
        raise ValueError("need |y| < b")
    return (y + b) / (2 * b)


def strip_poisson_kernels(x, y, b):
    """Kernels (k_top, k_bottom) at level y for data on Im z = +b and -b."""
    eta = _level(y, b)
    u = np.asarray(x, dtype=float) / (2 * b)
    s = math.sin(math.pi * eta)
    c = math.cos(math.pi * eta)
    ch = np.cosh(np.pi * np.minimum(np.abs(u), 200.0))
    k_bottom = 0.5 * s / (ch - c) / (2 * b)
    k_top = 0.5 * s / (ch + c) / (2 * b)
    return k_top, k_bottom


def kernel_halfwidth(b):
    """|x| beyond which both kernels carry total mass below TAIL_MASS.

    For |u| >= 1 each kernel is at most 2 e^{-pi |u|}, so the two-sided
    tails of both kernels add up to at most 8 e^{-pi U} / pi.
    """
    U = max(1.0, math.log(8.0 / (math.pi * TAIL_MASS)) / math.pi)
    return 2 * b * U


def poisson_extend(trace_plus: GridFunction, trace_minus: GridFunction, y, b) -> GridFunction:
    """Values at level y of the harmonic function with the given traces.

    Both traces live on one uniform grid; data outside the grid is taken
    as zero and the kernels are truncated at ``kernel_halfwidth(b)``.
    """
    eta = _level(y, b)
    g = trace_plus.grid
    if trace_minus.grid.size != g.size or not np.allclose(trace_minus.grid.coords, g.coords):
        raise ValueError("traces must share a grid")
    if not g.is_uniform:
        raise ValueError("traces must live on a uniform grid")
    h = g.spacing
    L = kernel_halfwidth(b)
    M = int(math.ceil(L / h))
    d = h * np.arange(-M, M + 1)
    kt, kb = strip_poisson_kernels(d, y, b)
    out = fftconvolve(trace_plus.values, (h * kt)[:, None], axes=0)[M:M + g.size]
    out = out + fftconvolve(trace_minus.values, (h * kb)[:, None], axes=0)[M:M + g.size]
    return GridFunction(g, trace_plus.space, out)


def kernel_masses(y, b):
    """Quadrature masses of (k_top, k_bottom) over the real line."""
    from scipy.integrate import quad

    def part(i):
        f = lambda x: strip_poisson_kernels(x, y, b)[i]
        return 2 * quad(f, 0, np.inf, limit=200, epsabs=1e-14, epsrel=1e-13)[0]

    return part(0), part(1)
