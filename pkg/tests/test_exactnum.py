from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cychom.exactnum import (LaurentScalar, WindowOverflow, format_rational, laurent_derivative,
                             laurent_mul, parse_rational, set_global_window, global_window)

U = LaurentScalar.monomial(1, 1)


def test_mul_examples():
    assert laurent_mul(LaurentScalar.const(1), U) == U
    assert laurent_mul(LaurentScalar({-1: 1, 0: 1}), U) == LaurentScalar({0: 1, 1: 1})
    assert laurent_mul(LaurentScalar.monomial(Fraction(1, 2), -2),
                       LaurentScalar.monomial(3, 3)) == LaurentScalar.monomial(Fraction(3, 2), 1)


def test_derivative_examples():
    assert laurent_derivative(LaurentScalar.monomial(1, 2)) == LaurentScalar.monomial(2, 1)
    assert laurent_derivative(LaurentScalar.const(7)).is_zero()
    assert laurent_derivative(LaurentScalar.monomial(1, -1)) == LaurentScalar.monomial(-1, -2)


def test_window_tracks_product():
    a = LaurentScalar({-1: 1, 2: 3})
    b = LaurentScalar({1: 1, 3: -1})
    assert laurent_mul(a, b).window == (0, 5)


def test_no_stored_zeros():
    assert LaurentScalar({0: 0, 1: 0}).coefficients == {}
    assert not (U - U)


def test_global_window_overflow():
    lo, hi = global_window()
    try:
        set_global_window(-2, 2)
        with pytest.raises(WindowOverflow):
            LaurentScalar.monomial(1, 3)
        with pytest.raises(WindowOverflow):
            laurent_mul(LaurentScalar.monomial(1, 2), U)
    finally:
        set_global_window(lo, hi)


def test_rational_parsing():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert parse_rational("-4") == -4
    assert format_rational(Fraction(-3, 9)) == "-1/3"
    assert format_rational(5) == "5"
    for bad in ("1/0", "1.5", "x"):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_json_round_trip():
    a = LaurentScalar({-2: Fraction(1, 3), 0: -1, 4: 7})
    assert a.to_json() == [[-2, "1/3"], [0, "-1"], [4, "7"]]
    assert LaurentScalar.from_json(a.to_json()) == a


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
laurents = st.dictionaries(st.integers(-2, 2), rationals, max_size=4).map(LaurentScalar)


@given(laurents, laurents, laurents)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + b == b + a


@given(laurents, laurents)
def test_derivative_leibniz(a, b):
    assert laurent_derivative(a * b) == laurent_derivative(a) * b + a * laurent_derivative(b)


@given(laurents)
def test_json_round_trip_property(a):
    assert LaurentScalar.from_json(a.to_json()) == a
