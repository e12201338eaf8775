"""Basis kernels: both backends against independent scalar oracles."""
import math

import numpy as np
import pytest

from kanheads import kernels
from kanheads.basis import bspline_basis, knot_vector, rswaf_basis
from kanheads.kernels import _pykernels


def cox_de_boor(i, k, x, t):
    """Textbook recursion on an arbitrary knot list, 0/0 taken as 0."""
    if k == 0:
        return 1.0 if t[i] <= x < t[i + 1] else 0.0
    left = right = 0.0
    if t[i + k] != t[i]:
        left = (x - t[i]) / (t[i + k] - t[i]) * cox_de_boor(i, k - 1, x, t)
    if t[i + k + 1] != t[i + 1]:
        right = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]) * cox_de_boor(i + 1, k - 1, x, t)
    return left + right


def oracle_knots(grid_size, k):
    h = 2.0 / grid_size
    return [-1.0 + h * j for j in range(-k, grid_size + k + 1)]


def oracle_basis(x, grid_size, k):
    t = oracle_knots(grid_size, k)
    return np.array([cox_de_boor(i, k, x, t) for i in range(grid_size + k)])


def test_knot_vector_layout():
    t = knot_vector(8, 3)
    assert len(t) == 8 + 2 * 3 + 1
    np.testing.assert_allclose(np.diff(t), 0.25, atol=1e-15)
    assert t[3] == -1.0 and t[-4] == pytest.approx(1.0, abs=1e-15)


def test_box_basis_is_one_hot(backend):
    b = bspline_basis(-0.9, 8, 0)
    assert b.tolist() == [1.0] + [0.0] * 7
    b = bspline_basis(0.3, 8, 0)
    assert b.sum() == 1.0 and b[5] == 1.0


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_partition_of_unity(backend, k):
    xs = np.linspace(-1.0, 1.0, 1000)
    if k == 0:
        xs = xs[:-1]  # half-open cells: x = 1 falls outside the last box
    bases, _ = kernels.bspline_basis(xs[:, None], 8, k)
    np.testing.assert_allclose(bases.sum(axis=2).ravel(), 1.0, atol=1e-12, rtol=0)
    assert bases.shape == (len(xs), 1, 8 + k)


def test_cubic_peak_at_knot(backend):
    b = bspline_basis(0.0, 8, 3)
    assert b.max() == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert sorted(b[b > 1e-15].tolist()) == pytest.approx([1 / 6, 1 / 6, 2 / 3], abs=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_matches_cox_de_boor_oracle(backend, k):
    xs = np.linspace(-1.0, 1.0, 1000)
    bases, _ = kernels.bspline_basis(xs[:, None], 8, k)
    expected = np.stack([oracle_basis(x, 8, k) for x in xs])
    np.testing.assert_allclose(bases[:, 0, :], expected, atol=1e-12, rtol=0)


def test_outside_domain_uses_extended_knots(backend):
    # x = 1.2 lies in the extension [1, 1.75): nonzero but no longer a partition of unity
    b = bspline_basis(1.2, 8, 3)
    np.testing.assert_allclose(b, oracle_basis(1.2, 8, 3), atol=1e-12)
    assert 0 < b.sum() < 1
    assert bspline_basis(5.0, 8, 3).sum() == 0.0
    assert bspline_basis(-5.0, 8, 3).sum() == 0.0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_bspline_derivative_matches_central_difference(backend, k, rng):
    xs = rng.uniform(-1.6, 1.6, size=(40, 3))
    grid = knot_vector(5, k)
    # keep away from knots, where lower-order splines have kinks
    keep = np.min(np.abs(xs[..., None] - grid), axis=-1) > 1e-3
    xs = np.where(keep, xs, 0.01)
    h = 1e-6
    _, d = kernels.bspline_basis(xs, 5, k)
    up, _ = kernels.bspline_basis(xs + h, 5, k)
    down, _ = kernels.bspline_basis(xs - h, 5, k)
    np.testing.assert_allclose(d, (up - down) / (2 * h), atol=2e-6)


def test_backends_agree(rng):
    if "cython" not in kernels.available_backends():
        pytest.skip("compiled kernels not built")
    from kanheads.kernels import _ckernels

    x = rng.uniform(-2.5, 2.5, size=(64, 9))
    for k in range(0, 6):
        for g in (1, 4, 8, 13):
            for a, b in zip(_pykernels.bspline_basis(x, g, k), _ckernels.bspline_basis(x, g, k)):
                np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)
    for a, b in zip(_pykernels.fourier_basis(x, 8), _ckernels.fourier_basis(x, 8)):
        np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)
    c = np.linspace(-1, 1, 8)
    # small and large widths take different compiled paths
    for r in (0.05, 3.5, 40.0, 1e3):
        for a, b in zip(_pykernels.rswaf_basis(x, c, r), _ckernels.rswaf_basis(x, c, r)):
            np.testing.assert_allclose(a, b, atol=1e-14, rtol=0)
    huge = np.array([[-1e6, 1e6, np.float64(c[3])]])
    b, t = _ckernels.rswaf_basis(huge, c, 5.0)
    assert np.isfinite(b).all() and np.isfinite(t).all()
    np.testing.assert_array_equal(t[0, 0], -1.0)
    np.testing.assert_array_equal(t[0, 1], 1.0)
    assert b[0, 2, 3] == 1.0


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_fourier_basis_values(backend):
    c, s = kernels.fourier_basis(np.array([[0.7]]), 4)
    np.testing.assert_allclose(c[0, 0], [math.cos(k * 0.7) for k in range(1, 5)], atol=1e-14)
    np.testing.assert_allclose(s[0, 0], [math.sin(k * 0.7) for k in range(1, 5)], atol=1e-14)


def test_rswaf_at_center_is_one(backend):
    centers = np.linspace(-1, 1, 8)
    for i, c in enumerate(centers):
        assert rswaf_basis(c, centers, 4.0)[i] == 1.0


def test_rswaf_unit_offset(backend):
    b = rswaf_basis(1.0, [0.0], 1.0)
    assert b[0] == pytest.approx(1.0 - math.tanh(1.0) ** 2, abs=1e-15)
    assert b[0] == pytest.approx(0.419974, abs=1e-6)


def test_rswaf_direct_evaluation_bounded_and_symmetric(backend, rng):
    centers = np.linspace(-1, 1, 8)
    for u in rng.uniform(-3, 3, size=200):
        b = rswaf_basis(u, centers, 4.0)
        direct = np.array([1.0 - math.tanh((u - c) * 4.0) ** 2 for c in centers])
        np.testing.assert_allclose(b, direct, atol=1e-15)
        assert np.all(b <= 1.0) and np.all(b >= 0.0)
    for delta in rng.uniform(0, 2, size=50):
        assert rswaf_basis(0.3 + delta, [0.3], 2.0)[0] == pytest.approx(rswaf_basis(0.3 - delta, [0.3], 2.0)[0],
                                                                         abs=1e-15)


def test_rswaf_positive_near_centers(backend):
    centers = np.linspace(-1, 1, 8)
    b = rswaf_basis(0.1, centers, 4.0)
    assert np.all(b > 0.0)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_rswaf_rejects_nonpositive_r(r):
    with pytest.raises(ValueError):
        rswaf_basis(0.0, [0.0], r)
