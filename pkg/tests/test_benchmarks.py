import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from mfsvr import benchmarks as B
from mfsvr.errors import ConfigurationError, DomainEvaluationError

mp.mp.dps = 40


def mp_currin(x1, x2):
    x1, x2 = mp.mpf(x1), mp.mpf(x2)
    fac = 1 if x2 == 0 else 1 - mp.e ** (-1 / (2 * x2))
    return fac * (2000 * x1**3 + 1900 * x1**2 + 2092 * x1 + 60) / (100 * x1**3 + 500 * x1**2 + 4 * x1 + 20)


def mp_park1(x):
    x1, x2, x3, x4 = (mp.mpf(v) for v in x)
    return x1 / 2 * (mp.sqrt(1 + (x2 + x3**2) * x4 / x1**2) - 1) + (x1 + 3 * x4) * mp.e ** (1 + mp.sin(x3))


unit = st.floats(0, 1, allow_nan=False)


def test_currin_closed_forms():
    assert B.currin_hf([0.0, 0.25]) == pytest.approx(3 * (1 - math.exp(-2)), rel=1e-15)
    assert B.currin_hf([0.5, 0.5]) == pytest.approx(float(mp_currin(0.5, 0.5)), rel=1e-14)
    x = np.array([0.31, 0.07])
    assert B.currin_hf(x) == B.currin_hf(x)


@settings(max_examples=60, deadline=None)
@given(x1=st.floats(0, 0.5), x2=st.floats(0.001, 0.5))
def test_currin_hf_matches_mpmath(x1, x2):
    assert B.currin_hf([x1, x2]) == pytest.approx(float(mp_currin(x1, x2)), rel=1e-12)


def test_currin_lf_coefficients():
    x = np.array([0.2, 0.3])
    shifts = [(0.25, 0.35), (0.25, 0.25), (0.15, 0.35), (0.15, 0.25)]
    f = [float(mp_currin(*p)) for p in shifts]
    rest = 0.25 * (f[1] + f[2] + f[3])
    assert B.currin_lf(x, 0.0) == pytest.approx(f[0] + rest, rel=1e-13)
    assert B.currin_lf(x, 1.0) == pytest.approx(-2 * f[0] + rest, rel=1e-13)


def test_currin_lf_clamped_shift_uses_limit():
    # x2 <= 0.05 clamps two shifted points to x2 = 0, where the HF factor tends to 1
    x = np.array([0.3, 0.02])
    f0 = float(mp_currin(0.35, 0.07))
    f1 = float(mp_currin(0.35, 0))
    f2 = float(mp_currin(0.25, 0.07))
    f3 = float(mp_currin(0.25, 0))
    m = 0.5
    expected = (1 - m * m - 2 * m) * f0 + 0.25 * (f1 + f2 + f3)
    assert B.currin_lf(x, m) == pytest.approx(expected, rel=1e-13)


def test_currin_hf_singular_line():
    with pytest.raises(DomainEvaluationError):
        B.currin_hf([0.2, 0.0])
    with pytest.raises(DomainEvaluationError):
        B.currin_hf(np.array([[0.1, 0.2], [0.3, 0.0]]))


@settings(max_examples=50, deadline=None)
@given(x1=st.floats(0, 0.5), x2=st.floats(0, 0.5))
def test_currin_lf_quadratic_in_m(x1, x2):
    x = [x1, x2]
    f0, fh, f1 = (B.currin_lf(x, m) for m in (0.0, 0.5, 1.0))
    # Lagrange interpolation through m = 0, 1/2, 1 evaluated at m = 1/4
    interp = 0.375 * f0 + 0.75 * fh - 0.125 * f1
    assert B.currin_lf(x, 0.25) == pytest.approx(interp, abs=1e-12 * (1 + abs(interp)))


def test_park1_x4_zero():
    x = np.array([-0.7, -0.3, 0.4, 0.0])
    assert B.park1_hf(x) == pytest.approx(-0.7 * math.exp(1 + math.sin(0.4)), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(x=st.lists(st.floats(0.01, 1), min_size=4, max_size=4))
def test_park1_matches_mpmath(x):
    assert B.park1_hf(x) == pytest.approx(float(mp_park1(x)), rel=1e-12, abs=1e-12)


def test_park1_errors():
    with pytest.raises(DomainEvaluationError):
        B.park1_hf([0.0, 0.5, 0.5, 0.5])
    with pytest.raises(DomainEvaluationError):
        B.park1_hf([-0.1, -0.9, 0.1, 0.9])  # 1 + (-0.89)(0.9)/0.01 < 0
    with pytest.raises(DomainEvaluationError):
        B.park1_lf([0.0, 0.5, 0.5, 0.5], 0.3)


def test_park1_lf_form():
    x = np.array([-0.4, -0.2, -0.6, -0.1])
    rest = 0.8 + 0.04 + 0.36 + 0.5
    fh = B.park1_hf(x)
    assert B.park1_lf(x, 0.0) == pytest.approx((1 + math.sin(-0.4) / 10) * fh + rest, rel=1e-14)
    assert B.park1_lf(x, 1.0) == pytest.approx(-2 * (1 + math.sin(-0.4) / 10) * fh + rest, rel=1e-14)


def test_park1_lf_independent_of_m_at_hf_root():
    x1, x2, x3 = -1.0, 0.5, 0.2
    x4 = brentq(lambda t: B.park1_hf([x1, x2, x3, t]), 0.0, 1.0, xtol=1e-15)
    x = [x1, x2, x3, x4]
    rest = -2 * x1 + x2**2 + x3**2 + 0.5
    for m in (0.0, 0.3, 1.0):
        assert B.park1_lf(x, m) == pytest.approx(rest, abs=1e-12)


def test_park2_values():
    assert B.park2_hf([0, 0, 0, 0]) == pytest.approx(2 / 3, rel=1e-15)
    assert B.park2_hf([1, 1, 0, 1]) == pytest.approx(2 / 3 * math.e**2, rel=1e-15)
    assert B.park2_lf([0, 0, 0, 0], 0.0) == pytest.approx(7 / 15, rel=1e-15)
    assert B.park2_hf([0.3, 0.2, 0.0, 0.1]) == B.park2_hf([0.3, 0.2, 0.0, 0.9])


@settings(max_examples=50, deadline=None)
@given(x=st.lists(unit, min_size=4, max_size=4), m=unit)
def test_park2_proportionality(x, m):
    diff = B.park2_lf(x, m) - 1.2 * B.park2_hf(x)
    ratio = -(0.5 * m * m + m + 0.5) * 2 / 3
    assert diff == pytest.approx(ratio * math.exp(x[0] + x[1]), rel=1e-12, abs=1e-14)


def test_vectorized_matches_pointwise():
    rng = np.random.default_rng(0)
    for name in B.FAMILIES:
        fam = B.get_family(name)
        box = fam.domain_for("standard" if name == "park1" else None)
        pts = box.low + rng.random((25, fam.dimension)) * box.span
        pts = pts[fam.valid_mask(pts, "lf")]
        np.testing.assert_array_equal(fam.hf(pts), [fam.hf(p) for p in pts])
        np.testing.assert_array_equal(fam.lf(pts, 0.6), [fam.lf(p, 0.6) for p in pts])


def test_m_range_and_registry():
    with pytest.raises(ConfigurationError):
        B.park2_lf([0, 0, 0, 0], 1.5)
    with pytest.raises(ConfigurationError):
        B.get_family("branin")
    with pytest.raises(ConfigurationError):
        B.get_family("park2").domain_for("standard")
    assert B.get_family("park1").domain_for("standard").to_list() == [[0.0, 1.0]] * 4
    assert B.get_family("currin").domain.to_list() == [[0.0, 0.5]] * 2


def test_valid_mask_agrees_with_evaluation():
    fam = B.get_family("park1")
    rng = np.random.default_rng(4)
    pts = -rng.random((300, 4))
    mask = fam.valid_mask(pts, "hf")
    assert 0 < mask.sum() < 300
    for p, ok in zip(pts, mask):
        if ok:
            assert np.isfinite(fam.hf(p))
        else:
            with pytest.raises(DomainEvaluationError):
                fam.hf(p)
