import numpy as np
import pytest
from numpy.polynomial import Polynomial

from sta_anneal._endpoint import Factored

PI = np.pi


def test_poly_orders_and_values():
    # s^2 (1 - s)^3 (2 + s)
    p = Polynomial([0, 0, 1]) * Polynomial([1, -1]) ** 3 * Polynomial([2, 1])
    F = Factored.poly(p)
    assert (F.p0, F.p1) == (2, 3)
    s = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(F(s), p(s), atol=1e-15)
    np.testing.assert_allclose(F.regular(np.array([0.0, 1.0])), [2.0, 3.0])


def test_sin_of_detects_endpoint_zeros():
    # sin(pi s^2): simple zero of order 2 at 0; sin(pi) at 1 with slope -2 pi
    F = Factored.sin_of(Polynomial([0, 0, PI]))
    assert (F.p0, F.p1) == (2, 1)
    np.testing.assert_allclose(F.regular(np.array([0.0, 1.0])), [PI, 2 * PI], rtol=1e-14)
    s = np.linspace(0.05, 0.95, 19)
    np.testing.assert_allclose(F(s), np.sin(PI * s**2), atol=1e-15)


def test_cos_of_matches_numpy():
    p = Polynomial([PI / 2, 0, 0, -2 * PI, 1.5 * PI])
    F = Factored.cos_of(p)
    s = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(F(s), np.cos(p(s)), atol=1e-15)
    assert F.p0 == 3  # cos(pi/2 - 2 pi s^3 + ...) ~ 2 pi s^3


def test_ratio_limit_is_exact():
    # sin(a s^2) / s^2 -> a, evaluated exactly at s = 0
    a = 0.7
    ratio = Factored.sin_of(Polynomial([0, 0, a])) / Factored.poly(Polynomial([0, 0, 1]))
    assert ratio(np.array([0.0]))[0] == pytest.approx(a, rel=1e-15)


def test_sum_keeps_lowest_order():
    A = Factored.poly(Polynomial([0, 1]))  # s
    B = Factored.poly(Polynomial([0, 0, 1]))  # s^2
    C = A + B
    assert C.p0 == 1
    s = np.linspace(0, 1, 7)
    np.testing.assert_allclose(C(s), s + s**2)
    np.testing.assert_allclose((A - B)(s), s - s**2)
    np.testing.assert_allclose((1.0 - A)(s), 1 - s)
    np.testing.assert_allclose((A * 3.0)(s), 3 * s)


def test_numpy_scalar_does_not_broadcast():
    F = Factored.poly(Polynomial([1.0, 2.0]))
    G = np.float64(2.0) * F
    assert isinstance(G, Factored)
