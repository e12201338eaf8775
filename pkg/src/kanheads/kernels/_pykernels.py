"""Vectorised numpy basis kernels (reference backend)."""
import numpy as np


def knot_vector(grid_size, order, lo=-1.0, hi=1.0):
    h = (hi - lo) / grid_size
    return lo + h * np.arange(-order, grid_size + order + 1, dtype=np.float64)


def fourier_basis(x, grid_size):
    """cos(k x) and sin(k x) for k = 1..G, each shaped (n, m, G)."""
    kx = x[:, :, None] * np.arange(1, grid_size + 1, dtype=np.float64)
    return np.cos(kx), np.sin(kx)


def bspline_basis(x, grid_size, order, lo=-1.0, hi=1.0):
    """Order-``order`` B-spline values and x-derivatives, each (n, m, G + order).

    Full-width Cox-de Boor recursion over the extended uniform knot vector.
    Half-open cells [t_i, t_{i+1}); outside the extended knots everything is 0.
    """
    t = knot_vector(grid_size, order, lo, hi)
    h = (hi - lo) / grid_size
    xe = x[:, :, None]
    bases = ((xe >= t[:-1]) & (xe < t[1:])).astype(np.float64)
    lower = None
    for p in range(1, order + 1):
        if p == order:
            lower = bases
        bases = (
            (xe - t[: -(p + 1)]) / (t[p:-1] - t[: -(p + 1)]) * bases[:, :, :-1]
            + (t[p + 1:] - xe) / (t[p + 1:] - t[1:-p]) * bases[:, :, 1:]
        )
    if order == 0:
        deriv = np.zeros_like(bases)
    else:
        deriv = (lower[:, :, :-1] - lower[:, :, 1:]) / h
    return bases, deriv


def rswaf_basis(x, centers, inv_denom):
    """1 - tanh^2((x - c) r) and tanh((x - c) r), each (n, m, G)."""
    t = np.tanh((x[:, :, None] - centers) * inv_denom)
    return 1.0 - t * t, t
