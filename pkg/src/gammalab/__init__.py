"""Gamma norms, type/cotype probes and square-function estimates for finite-dimensional spaces."""
from .banach import (RandomizedAverage, SpaceDescriptor, VectorFamily, dual, dual_pairing, norm,
                     parse_space, randomized_average, type_cotype_probe, witness_search)
from .gamma import EstimatorConfig, GammaEstimate, GridFunction, MeasuredGrid, gamma_norm
from .kernels import BACKEND
from .probes import ProbeAssertionError, ProbeResult, read_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EstimatorConfig", "GammaEstimate", "GridFunction", "MeasuredGrid",
    "ProbeAssertionError", "ProbeResult", "RandomizedAverage", "SpaceDescriptor", "VectorFamily",
    "dual", "dual_pairing", "gamma_norm", "norm", "parse_space", "randomized_average", "read_csv",
    "type_cotype_probe", "witness_search", "write_csv",
]
