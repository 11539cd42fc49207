import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optratchet import bessel_j, bessel_row
from optratchet.verification import bessel_series

from conftest import series_bessel

# Extended-precision Taylor series values, frozen (remainder bound < 1e-40).
SERIES_J0_5_4795 = -0.013854498859866260816
X_REF = 4.0 / 0.73
SERIES_ROW_X_REF = [
    -0.013870920299060460638, -0.3425054692561269795, -0.11114357597942588688,
    0.26137065879114608208, 0.39734444735573084676, 0.31875223434822095419,
    0.18437838032977239463, 0.08503641857398059006, 0.032889669126748012968,
    0.011001415276123607808, 0.003249980055318038681, 0.00086101192578723337773,
    0.00020698282671770333055,
]
SERIES_J40_5_4795 = 3.2893e-31


def test_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    assert bessel_j(-2, 1.5) == bessel_j(2, 1.5)
    assert bessel_j(-3, 1.5) == -bessel_j(3, 1.5)
    assert bessel_j(3, -1.5) == -bessel_j(3, 1.5)
    assert bessel_j(4, -1.5) == bessel_j(4, 1.5)


def test_frozen_series_value():
    assert bessel_j(0, 5.4795) == pytest.approx(SERIES_J0_5_4795, abs=1e-13)


def test_frozen_row_at_reference_argument():
    row = bessel_row(0, 12, X_REF)
    np.testing.assert_allclose(row.values, SERIES_ROW_X_REF, rtol=0, atol=1e-13)


def test_oracle_remainder_is_negligible():
    value, bound = series_bessel(0, 5.4795)
    assert bound < 1e-30
    assert value == pytest.approx(SERIES_J0_5_4795, abs=1e-15)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.4795, 7.3, 10.0, -4.2])
def test_against_extended_precision_series(x):
    for n in range(-20, 21):
        ref, _ = series_bessel(n, x)
        assert abs(bessel_j(n, x) - ref) <= 1e-12, (n, x)


@pytest.mark.parametrize("x", [15.0, 20.0, 33.3, 50.0])
def test_large_argument_against_series(x):
    # extended precision absorbs the cancellation between huge terms
    for n in (0, 1, 7, 25, 60):
        ref, _ = series_bessel(n, x, dps=80)
        assert abs(bessel_j(n, x) - ref) <= 1e-12, (n, x)


def test_matches_scipy_wide_range():
    scipy_special = pytest.importorskip("scipy.special")
    for x in (1e-8, 0.3, 12.0, 49.9, 150.0, 1000.0):
        n = np.arange(-80, 81)
        row = bessel_row(-80, 80, x)
        tol = 1e-12 if x <= 50 else 1e-10
        np.testing.assert_allclose(row.values, scipy_special.jv(n, x), rtol=0, atol=tol)


def test_row_delta_at_zero():
    assert list(bessel_row(-3, 3, 0.0).values) == [0, 0, 0, 1, 0, 0, 0]


def test_row_small_normalization():
    row = bessel_row(-2, 2, 2.0)
    full = bessel_row(0, 60, 2.0)
    assert row[0] + 2 * full.values[2::2].sum() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(row.values[2:], full.values[:3], rtol=0, atol=1e-15)


def test_tail_decay():
    row = bessel_row(0, 60, 5.4795)
    assert np.all(np.abs(row.values[40:]) < 1e-30)
    assert row[40] == pytest.approx(SERIES_J40_5_4795, rel=1e-4)


def test_tiny_argument_leading_term():
    x = 1e-40
    assert bessel_j(0, x) == 1.0
    assert bessel_j(1, x) == pytest.approx(x / 2, rel=1e-15)
    assert bessel_j(2, 1e-12) == pytest.approx(1e-24 / 8, rel=1e-10)


def test_errors():
    with pytest.raises(ValueError):
        bessel_j(0, math.nan)
    with pytest.raises(ValueError):
        bessel_j(0, 2e6)
    with pytest.raises(ValueError):
        bessel_row(3, 2, 1.0)
    with pytest.raises(IndexError):
        bessel_row(0, 3, 1.0)[4]


@pytest.mark.parametrize("x", [0.5, 2.0, 5.4795, 10.0])
def test_identities(x):
    row = bessel_row(-80, 80, x)
    n = np.arange(1, 81)
    np.testing.assert_array_equal(row.take(-n), np.where(n % 2, -1.0, 1.0) * row.take(n))
    assert row[0] + 2 * row.take(np.arange(2, 81, 2)).sum() == pytest.approx(1.0, abs=1e-10)
    assert np.sum(row.values ** 2) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.integers(-30, 30))
def test_row_consistent_with_scalar(x, n):
    row = bessel_row(n - 5, n + 5, x)
    assert abs(row[n] - bessel_j(n, x)) <= 1e-13


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50, allow_subnormal=False))
def test_sum_of_squares_property(x):
    w = int(abs(x)) + 40
    row = bessel_row(-w, w, x)
    assert np.sum(row.values ** 2) == pytest.approx(1.0, abs=1e-10)


def test_double_series_helper_agrees_with_extended():
    # the runtime verification uses a double-precision series; keep it honest
    for x in (0.5, 5.4795, 10.0):
        for n in (-7, 0, 3, 20):
            assert abs(bessel_series(n, x) - series_bessel(n, x)[0]) < 5e-13
