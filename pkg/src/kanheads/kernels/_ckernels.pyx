# cython: language_level=3
"""Compiled basis kernels.

Same signatures and semantics as ``_pykernels``. The B-spline kernel only
evaluates the order+1 functions that are nonzero in the cell containing x,
and the Fourier kernel builds the harmonics by angle addition.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, exp, expm1, fabs, floor

cnp.import_array()

cdef enum:
    MAX_ORDER = 15


def knot_vector(int grid_size, int order, double lo=-1.0, double hi=1.0):
    cdef double h = (hi - lo) / grid_size
    return lo + h * np.arange(-order, grid_size + order + 1, dtype=np.float64)


def fourier_basis(double[:, ::1] x, int grid_size):
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], a, i
    cdef int k
    cos_out = np.empty((n, m, grid_size), dtype=np.float64)
    sin_out = np.empty((n, m, grid_size), dtype=np.float64)
    cdef double[:, :, ::1] co = cos_out
    cdef double[:, :, ::1] so = sin_out
    cdef double c1, s1, ck, sk, tmp
    for a in range(n):
        for i in range(m):
            c1 = cos(x[a, i])
            s1 = sin(x[a, i])
            ck = c1
            sk = s1
            for k in range(grid_size):
                co[a, i, k] = ck
                so[a, i, k] = sk
                tmp = ck * c1 - sk * s1
                sk = sk * c1 + ck * s1
                ck = tmp
    return cos_out, sin_out


cdef inline double _knot(Py_ssize_t i, int order, double lo, double h):
    return lo + h * <double>(i - order)


def bspline_basis(double[:, ::1] x, int grid_size, int order, double lo=-1.0, double hi=1.0):
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"spline order must be in [0, {MAX_ORDER}]")
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], a, i, j, r, idx
    cdef Py_ssize_t ncells = grid_size + 2 * order
    cdef Py_ssize_t nbasis = grid_size + order
    cdef int p
    cdef double h = (hi - lo) / grid_size
    cdef double xv, saved, temp, t0, tend
    cdef double N[MAX_ORDER + 1]
    cdef double lower[MAX_ORDER + 1]
    cdef double left[MAX_ORDER + 1]
    cdef double right[MAX_ORDER + 1]
    bases_out = np.zeros((n, m, nbasis), dtype=np.float64)
    deriv_out = np.zeros((n, m, nbasis), dtype=np.float64)
    cdef double[:, :, ::1] bo = bases_out
    cdef double[:, :, ::1] do = deriv_out
    t0 = _knot(0, order, lo, h)
    tend = _knot(ncells, order, lo, h)
    for a in range(n):
        for i in range(m):
            xv = x[a, i]
            if not (xv >= t0 and xv < tend):
                continue
            j = <Py_ssize_t>floor((xv - t0) / h)
            if j >= ncells:
                j = ncells - 1
            if j < 0:
                j = 0
            # match the reference backend's cell test exactly
            while j > 0 and xv < _knot(j, order, lo, h):
                j -= 1
            while j < ncells - 1 and xv >= _knot(j + 1, order, lo, h):
                j += 1
            N[0] = 1.0
            lower[0] = 1.0
            for p in range(1, order + 1):
                if p == order:
                    for r in range(order):
                        lower[r] = N[r]
                left[p] = xv - _knot(j + 1 - p, order, lo, h)
                right[p] = _knot(j + p, order, lo, h) - xv
                saved = 0.0
                for r in range(p):
                    temp = N[r] / (right[r + 1] + left[p - r])
                    N[r] = saved + right[r + 1] * temp
                    saved = left[p - r] * temp
                N[p] = saved
            # N[r] is basis j - order + r
            for r in range(order + 1):
                idx = j - order + r
                if 0 <= idx < nbasis:
                    bo[a, i, idx] = N[r]
            if order > 0:
                # lower[r] is the order-1 basis j - order + 1 + r, r in [0, order)
                for r in range(order):
                    idx = j - order + 1 + r
                    if 0 <= idx < nbasis:
                        do[a, i, idx] += lower[r] / h
                    if 0 <= idx - 1 < nbasis:
                        do[a, i, idx - 1] -= lower[r] / h
    return bases_out, deriv_out


cdef inline void _rswaf_pair(double v, double* t, double* b) nogil:
    cdef double em = expm1(-2.0 * fabs(v))
    cdef double d = 2.0 + em
    t[0] = -em / d if v >= 0 else em / d
    b[0] = 4.0 * (1.0 + em) / (d * d)


def rswaf_basis(double[:, ::1] x, double[::1] centers, double inv_denom):
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], g = centers.shape[0], a, i, k
    b_out = np.empty((n, m, g), dtype=np.float64)
    t_out = np.empty((n, m, g), dtype=np.float64)
    cdef double[:, :, ::1] bo = b_out
    cdef double[:, :, ::1] to = t_out
    cdef double v, e, ex, cmax = 0.0
    cdef double[::1] ec = np.empty(g, dtype=np.float64)
    # exp(-2 (x - c) r) = exp(-2 x r) * exp(2 c r): one exp per input and per
    # centre instead of per pair. libm tanh is several times slower than exp.
    for k in range(g):
        cmax = max(cmax, fabs(centers[k] * inv_denom))
        ec[k] = exp(2.0 * centers[k] * inv_denom)
    for a in range(n):
        for i in range(m):
            if cmax < 20.0 and fabs(x[a, i] * inv_denom) < 20.0:
                ex = exp(-2.0 * x[a, i] * inv_denom)
                for k in range(g):
                    if x[a, i] == centers[k]:
                        # the rounded product is not exactly 1; the peak must be
                        to[a, i, k] = 0.0
                        bo[a, i, k] = 1.0
                        continue
                    e = ex * ec[k]
                    to[a, i, k] = (1.0 - e) / (1.0 + e)
                    bo[a, i, k] = 4.0 * e / ((1.0 + e) * (1.0 + e))
            else:
                # large |x r|: the product would lose precision or overflow
                for k in range(g):
                    v = (x[a, i] - centers[k]) * inv_denom
                    _rswaf_pair(v, &to[a, i, k], &bo[a, i, k])
    return b_out, t_out
