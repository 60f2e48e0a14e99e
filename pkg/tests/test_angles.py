"""Tests for exact and inexact angles."""

import math
from fractions import Fraction

import pytest

from polysurf.angles import Angle, format_number, parse_number


class TestParse:
    def test_exact_fraction(self):
        angle = Angle.parse("1/3")
        assert angle.is_exact
        assert angle.pi_units == Fraction(1, 3)

    def test_radians(self):
        angle = Angle.parse("rad:0.7")
        assert not angle.is_exact
        assert angle.to_radians() == pytest.approx(0.7)

    @pytest.mark.parametrize("text", ["abc", "1/0", "rad:x", ""])
    def test_rejects_garbage(self, text):
        with pytest.raises(ValueError):
            Angle.parse(text)


class TestArithmetic:
    def test_exact_sum_stays_exact(self):
        total = Angle.exact(1, 3) + Angle.exact(1, 6)
        assert total.pi_units == Fraction(1, 2)

    def test_mixed_sum_is_inexact(self):
        total = Angle.exact(1, 2) + Angle.radians(0.1)
        assert not total.is_exact
        assert total.to_radians() == pytest.approx(math.pi / 2 + 0.1)

    def test_normalized_wraps_into_two_pi(self):
        assert Angle.exact(7, 3).normalized().pi_units == Fraction(1, 3)
        assert Angle.exact(-1, 2).normalized().pi_units == Fraction(3, 2)

    def test_isclose_mod_two_pi(self):
        assert Angle.exact(1, 4).isclose(Angle.exact(9, 4))
        assert Angle.exact(1).isclose(Angle.radians(math.pi))
        assert not Angle.exact(1, 4).isclose(Angle.exact(5, 4))
        assert Angle.exact(1, 4).isclose(Angle.exact(5, 4), modulus=1)


class TestExactValues:
    def test_rational_sines(self):
        assert Angle.exact(1, 6).exact_sin() == Fraction(1, 2)
        assert Angle.exact(3, 2).exact_sin() == -1
        assert Angle.exact(1, 3).exact_sin() is None

    def test_rational_cosines(self):
        assert Angle.exact(1, 3).exact_cos() == Fraction(1, 2)
        assert Angle.exact(1, 4).exact_cos() is None

    def test_tan_class(self):
        assert Angle.exact(1, 4).tan_class() == (True, Fraction(1))
        assert Angle.exact(1, 2).tan_class() == (True, None)
        assert Angle.exact(1, 3).tan_class() == (False, None)
        assert Angle.radians(0.5).tan_class() == (False, None)

    def test_from_vector_is_exact_on_axes_and_diagonals(self):
        assert Angle.from_vector(0, 1).pi_units == Fraction(1, 2)
        assert Angle.from_vector(-2, -2).pi_units == Fraction(5, 4)
        assert not Angle.from_vector(1, 2).is_exact

    def test_from_vector_rejects_zero(self):
        with pytest.raises(ValueError):
            Angle.from_vector(0, 0)


def test_describe():
    assert Angle.exact(1, 3).describe() == "pi/3"
    assert Angle.exact(-1).describe() == "-pi"
    assert Angle.exact(3, 2).describe() == "3pi/2"
    assert Angle.zero().describe() == "0"


def test_str_round_trips_through_parse():
    for angle in (Angle.exact(5, 7), Angle.radians(1.25)):
        assert Angle.parse(str(angle)) == angle


def test_numbers():
    assert parse_number("3") == 3
    assert parse_number("2/4") == Fraction(1, 2)
    assert isinstance(parse_number("0.25"), float)
    assert format_number(Fraction(3, 4)) == "3/4"
    assert format_number(Fraction(4, 2)) == "2"
    with pytest.raises(ValueError):
        parse_number("x")
