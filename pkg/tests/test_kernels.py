import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfsvr.errors import DimensionError
from mfsvr.kernels import (
    CoSvrHyperparams,
    KernelParams,
    assemble_mfs_kernel,
    gauss_kernel,
    gauss_kernel_matrix,
    mfs_cross_vector,
)

from conftest import brute_mfs, random_hp


def test_zero_distance_returns_sigma():
    assert gauss_kernel([0.3, 0.7], [0.3, 0.7], KernelParams(2.5, [4.0, 9.0])) == 2.5


def test_zero_theta_erases_distance():
    assert gauss_kernel([0.0, 5.0], [3.0, -1.0], KernelParams(1.0, [0.0, 0.0])) == 1.0


def test_unit_corner_value():
    with mpmath.workdps(30):
        expected = float(mpmath.exp(-2))
    assert gauss_kernel([0, 0], [1, 1], KernelParams(1.0, [1, 1])) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(0.135335, abs=1e-6)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        gauss_kernel([0, 0], [1, 1, 1], KernelParams(1.0, [1, 1]))
    with pytest.raises(DimensionError):
        gauss_kernel([0, 0], [1, 1], KernelParams(1.0, [1, 1, 1]))
    with pytest.raises(DimensionError):
        assemble_mfs_kernel(np.zeros((2, 2)), np.zeros((2, 3)), random_hp(np.random.default_rng(0), 2))


coords = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(
    x=arrays(float, 3, elements=coords),
    y=arrays(float, 3, elements=coords),
    sigma=st.floats(0, 100),
    theta=arrays(float, 3, elements=st.floats(0, 50)),
)
def test_symmetric_and_bounded(x, y, sigma, theta):
    params = KernelParams(sigma, theta)
    k = gauss_kernel(x, y, params)
    assert k == gauss_kernel(y, x, params)
    assert 0.0 <= k <= sigma


def test_single_point_blocks():
    hp = CoSvrHyperparams(1.0, 1.0, 1.0, [3.0], [7.0])
    K = assemble_mfs_kernel([[0.4]], [[0.4]], hp)
    np.testing.assert_array_equal(K.values, [[1.0, 1.0], [1.0, 2.0]])


def test_rho_zero_decouples(rng):
    hp = CoSvrHyperparams(0.0, 1.3, 0.7, [1.0, 2.0], [3.0, 0.5])
    xL, xH = rng.random((4, 2)), rng.random((3, 2))
    K = assemble_mfs_kernel(xL, xH, hp)
    assert np.all(K.lh == 0) and np.all(K.hl == 0)
    np.testing.assert_allclose(K.hh, gauss_kernel_matrix(xH, xH, KernelParams(0.7, [3.0, 0.5])), rtol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    xL, xH = rng.random((2, 2)), rng.random((2, 2))
    hp = random_hp(rng, 2)
    K = assemble_mfs_kernel(xL, xH, hp)
    np.testing.assert_allclose(K.values, brute_mfs(xL, xH, hp), rtol=1e-13, atol=0)


def test_block_matrix_is_exactly_symmetric(rng):
    for _ in range(20):
        s = rng.integers(1, 5)
        K = assemble_mfs_kernel(rng.random((rng.integers(1, 15), s)), rng.random((rng.integers(1, 8), s)), random_hp(rng, s))
        assert np.array_equal(K.values, K.values.T)
        assert np.array_equal(K.lh, K.hl.T)


def test_cross_vector_coincident_point():
    hp = CoSvrHyperparams(0.8, 1.5, 0.4, [2.0, 2.0], [1.0, 1.0])
    xL = np.array([[0.1, 0.2], [0.9, 0.5]])
    xH = np.array([[0.3, 0.3], [0.6, 0.7]])
    k = mfs_cross_vector(xH[1], xL, xH, hp)
    assert k[2 + 1] == pytest.approx(0.8**2 * 1.5 + 0.4, rel=1e-15)


def test_cross_vector_rho_zero(rng):
    hp = CoSvrHyperparams(0.0, 1.0, 1.0, [1.0], [1.0])
    k = mfs_cross_vector([0.5], rng.random((5, 1)), rng.random((3, 1)), hp)
    assert np.all(k[:5] == 0)


@pytest.mark.parametrize("seed", range(5))
def test_cross_vector_matches_appended_assembly(seed):
    rng = np.random.default_rng(seed)
    s = 3
    xL, xH, xs = rng.random((6, s)), rng.random((4, s)), rng.random(s)
    hp = random_hp(rng, s)
    K = assemble_mfs_kernel(xL, np.vstack([xH, xs]), hp).values
    k = mfs_cross_vector(xs, xL, xH, hp)
    np.testing.assert_allclose(k, K[-1, :-1], rtol=1e-14)
    np.testing.assert_allclose(k, K[:-1, -1], rtol=1e-14)


def test_gaussian_block_psd(rng):
    for _ in range(30):
        n, s = rng.integers(2, 51), rng.integers(1, 5)
        sigma = rng.uniform(0.1, 10)
        x = rng.random((n, s))
        K = gauss_kernel_matrix(x, x, KernelParams(sigma, rng.uniform(0.01, 20, s)))
        assert np.linalg.eigvalsh(K).min() >= -1e-8 * sigma


def test_rejects_negative_parameters():
    with pytest.raises(ValueError):
        KernelParams(-1.0, [1.0])
    with pytest.raises(ValueError):
        KernelParams(1.0, [-1.0])
    with pytest.raises(ValueError):
        CoSvrHyperparams(0.5, 1.0, 1.0, [1.0], [1.0], gamma=0.0)


def test_vector_roundtrip():
    hp = CoSvrHyperparams(0.3, 2.0, 0.5, [1.0, 2.0], [3.0, 4.0], gamma=50.0)
    again = CoSvrHyperparams.from_vector(hp.to_vector(), gamma=50.0)
    assert again.to_dict() == hp.to_dict()
    assert math.isclose(hp.to_vector()[0], 0.3)
