"""Holomorphic functions on strips and sectors and the probes built on them."""
from .cauchy import cauchy_derivative, default_radius
from .chains import (disk_nesting_probe, lattice_gamma, lattice_truncation, strip_chain_constant,
                     strip_chain_probe, y_chain_probe)
from .domains import DomainError, SectorDomain, StripDomain
from .functions import DecayCertificate, HoloFn, gaussian_fn, map_strip_sector, rational_fn, sech_fn
from .poisson import kernel_halfwidth, kernel_masses, poisson_extend, strip_poisson_kernels
from .theorems import theorem_probe
from .witness import SincWitness, sinc_witness

__all__ = [
    "DecayCertificate", "DomainError", "HoloFn", "SectorDomain", "SincWitness", "StripDomain",
    "cauchy_derivative", "default_radius", "disk_nesting_probe", "gaussian_fn", "kernel_halfwidth",
    "kernel_masses", "lattice_gamma", "lattice_truncation", "map_strip_sector", "poisson_extend",
    "rational_fn", "sech_fn", "sinc_witness", "strip_chain_constant", "strip_chain_probe",
    "strip_poisson_kernels", "theorem_probe", "y_chain_probe",
]
