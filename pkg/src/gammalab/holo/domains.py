"""Strip and sector domains."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Evaluation or contour requested outside the declared domain."""


@dataclass(frozen=True)
class StripDomain:
    """{z : |Im z| < half_width}; ``inf`` for entire functions."""

    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("strip half-width must be positive")

    def contains(self, z):
        return np.abs(np.imag(z)) < self.half_width

    def distance_to_boundary(self, z):
        return self.half_width - np.abs(np.imag(z))


@dataclass(frozen=True)
class SectorDomain:
    """{z != 0 : |arg z| < angle} with 0 < angle < pi."""

    angle: float

    def __post_init__(self):
        if not 0 < self.angle < math.pi:
            raise ValueError("sector angle must lie in (0, pi)")

    def contains(self, z):
        z = np.asarray(z)
        return (z != 0) & (np.abs(np.angle(z)) < self.angle)

    def distance_to_boundary(self, z):
        z = np.asarray(z, dtype=complex)
        gap = self.angle - np.abs(np.angle(z))
        r = np.abs(z)
        return np.where(gap >= math.pi / 2, r, r * np.sin(gap))
