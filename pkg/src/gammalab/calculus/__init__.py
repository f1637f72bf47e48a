"""Sectorial matrices, contour functional calculus and square-function probes."""
from .diffusion import NotDiffusionError, check_diffusion, diffusion_extend_probe, kernel_projection
from .dunford import (ContourError, contour_apply, default_angle, diagonal_oracle, fractional_power,
                      symbol_apply)
from .operators import (Certificate, NotSectorialError, ResolventError, SectorialOperator, as_operator,
                        cycle_laplacian, diag_operator, laplacian1d, load_operator_csv, parse_operator,
                        resolvent, save_operator_csv, sectoriality_certificate)
from .symbols import (Symbol, make_symbol, parse_symbol, rational_symbol, symbol_g, symbol_q, symbol_v,
                      symbol_w)
from .traces import (GFunctionTrace, GridTooNarrowError, calibrated_dual, calibration_integral,
                     default_log_grid, g_trace, lps_probe, lps_sweep, reproducing_integral)

__all__ = [
    "Certificate", "ContourError", "GFunctionTrace", "GridTooNarrowError", "NotDiffusionError",
    "NotSectorialError", "ResolventError", "SectorialOperator", "Symbol", "as_operator",
    "calibrated_dual", "calibration_integral", "check_diffusion", "contour_apply", "cycle_laplacian",
    "default_angle", "default_log_grid", "diag_operator", "diagonal_oracle", "diffusion_extend_probe",
    "fractional_power", "g_trace", "kernel_projection", "laplacian1d", "load_operator_csv", "lps_probe",
    "lps_sweep", "make_symbol", "parse_operator", "parse_symbol", "rational_symbol",
    "reproducing_integral", "resolvent", "save_operator_csv", "sectoriality_certificate",
    "symbol_apply", "symbol_g", "symbol_q", "symbol_v", "symbol_w",
]
