"""Single-point views of the basis kernels."""
import numpy as np

from . import kernels


def knot_vector(grid_size: int, order: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Uniform knots on [lo, hi] extended by ``order`` knots on each side."""
    return kernels.knot_vector(grid_size, order, lo, hi)


def bspline_basis(x: float, grid_size: int, order: int = 3) -> np.ndarray:
    """The G + order B-spline basis values at ``x`` on the [-1, 1] grid."""
    if order < 0:
        raise ValueError("spline order must be >= 0")
    bases, _ = kernels.bspline_basis(np.array([[x]], dtype=np.float64), grid_size, order)
    return bases[0, 0]


def rswaf_basis(u: float, centers, inv_denom: float) -> np.ndarray:
    """Reflectional switch bumps ``1 - tanh^2((u - c) * inv_denom)`` for each center."""
    if not inv_denom > 0:
        raise ValueError(f"inverse denominator must be > 0, got {inv_denom}")
    b, _ = kernels.rswaf_basis(np.array([[u]], dtype=np.float64), np.asarray(centers, dtype=np.float64), inv_denom)
    return b[0, 0]
