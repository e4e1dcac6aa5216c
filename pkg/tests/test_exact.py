import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from forge.exact import Angle, Surd

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)
nonneg = st.fractions(min_value=0, max_value=50, max_denominator=30)


@given(nonneg)
def test_sqrt_squares_back(x):
    s = Surd.sqrt(x)
    assert s.square == x
    assert s.sign() >= 0
    assert math.isclose(float(s), math.sqrt(x), rel_tol=1e-12, abs_tol=1e-12)


@given(nonneg, nonneg)
def test_comparison_agrees_with_floats(a, b):
    x, y = Surd.sqrt(a), -Surd.sqrt(b)
    assert (x < y) == (float(x) < float(y) and not math.isclose(float(x), float(y)))
    assert (Surd.sqrt(a) < Surd.sqrt(b)) == (a < b)


@given(nonneg, nonneg)
def test_products_and_quotients(a, b):
    x, y = Surd.sqrt(a), Surd.sqrt(b)
    assert (x * y).square == a * b
    if b:
        assert (x / y).square == a / b


@given(fracs, fracs)
def test_same_radicand_sums(a, b):
    r3 = Surd.sqrt(3)
    assert (a * r3 + b * r3) == (a + b) * r3
    assert Surd(a) + b == Surd(a + b)


def test_mixed_sum_rejected():
    with pytest.raises(ValueError):
        Surd.sqrt(2) + Surd.sqrt(3)


def test_string_round_trip():
    for s in [Surd.sqrt(3), Surd.sqrt(Fraction(3, 4)), -Surd.sqrt(12), Surd(Fraction(5, 2)), Surd.sqrt(0)]:
        assert Surd.parse(str(s)) == s
    assert str(Surd.sqrt(12)) == "2*sqrt(3)"
    assert str(Surd.sqrt(0)) == "0"


@pytest.mark.parametrize("x", [Fraction(k, d) for d in (1, 2, 3, 4, 6) for k in range(d + 1)])
def test_tabulated_angles(x):
    a = Angle.from_pi(x)
    assert a.pi_fraction() == x
    assert math.isclose(a.radians, float(x) * math.pi, abs_tol=1e-12)
    assert Angle.from_json(a.to_json()) == a


@given(st.lists(st.sampled_from([Fraction(k, 12) for k in range(13)]), min_size=2, max_size=2))
def test_angle_order_matches_pi_order(pair):
    x, y = pair
    if x.denominator in (1, 2, 3, 4, 6) and y.denominator in (1, 2, 3, 4, 6):
        assert (Angle.from_pi(x) < Angle.from_pi(y)) == (x < y)


def test_angle_from_cos():
    assert Angle.from_cos(-Surd.sqrt(Fraction(3, 4))) == Fraction(5, 6)
    assert Angle.from_cos(Fraction(-1, 2)) == Fraction(2, 3)
    assert Angle.from_cos(0).pi_fraction() == Fraction(1, 2)
    assert Angle(Fraction(1, 9), 1).pi_fraction() is None
