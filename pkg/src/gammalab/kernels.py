"""Backend selection for the hot kernels.

The compiled module is preferred; set ``GAMMALAB_PURE_PYTHON=1`` to force
the numpy fallback. ``BACKEND`` names the active implementation.
"""
import os

from . import _pykernels

_c = None
if os.environ.get("GAMMALAB_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c
    except ImportError:  # no compiler at install time
        _c = None

BACKEND = "cython" if _c is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    name = name or BACKEND
    if name == "python":
        return _pykernels
    if name == "cython":
        if _c is None:
            raise ImportError("compiled kernels are not available")
        return _c
    raise ValueError(f"unknown backend {name!r}")


def row_norms(Z, scale, r):
    return get_backend().row_norms(Z, scale, float(r))


def rademacher_exhaustive(X, scale, r, moment, norm_fn=None):
    if norm_fn is not None:
        return _pykernels.rademacher_exhaustive(X, scale, r, moment, norm_fn=norm_fn)
    return get_backend().rademacher_exhaustive(X, scale, float(r), float(moment))
