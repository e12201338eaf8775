"""Basis-expansion kernels with a compiled core and a numpy fallback.

The compiled backend (``_ckernels``, Cython) is used when it imports.
Set ``KANHEADS_PURE_PYTHON=1`` before import, or call
``use_backend("python")``, to force the numpy backend.
"""
import os
from contextlib import contextmanager

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_active = None


def available_backends():
    return sorted(BACKENDS)


def use_backend(name):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}")
    _active = name


def backend_name():
    return _active


@contextmanager
def backend(name):
    """Temporarily switch backends."""
    previous = _active
    use_backend(name)
    try:
        yield name
    finally:
        use_backend(previous)


def _default():
    if os.environ.get("KANHEADS_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return "cython" if "cython" in BACKENDS else "python"


use_backend(_default())


def _impl():
    return BACKENDS[_active]


def knot_vector(grid_size, order, lo=-1.0, hi=1.0):
    return _pykernels.knot_vector(grid_size, order, lo, hi)


def fourier_basis(x, grid_size):
    return _impl().fourier_basis(np.ascontiguousarray(x, dtype=np.float64), int(grid_size))


def bspline_basis(x, grid_size, order, lo=-1.0, hi=1.0):
    return _impl().bspline_basis(np.ascontiguousarray(x, dtype=np.float64), int(grid_size), int(order),
                                 float(lo), float(hi))


def rswaf_basis(x, centers, inv_denom):
    return _impl().rswaf_basis(np.ascontiguousarray(x, dtype=np.float64),
                               np.ascontiguousarray(centers, dtype=np.float64), float(inv_denom))
