"""Tests for planar isometries."""

import math
from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.isometry import Isometry, compose


def test_rotation_after_translation():
    rotation = Isometry(rotation=Angle.exact(1, 3))
    shifted = compose(rotation, Isometry.translation_by(1, 0))
    assert shifted.rotation.pi_units == Fraction(1, 3)
    tx, ty = shifted.translation
    assert float(tx) == pytest.approx(0.5)
    assert float(ty) == pytest.approx(math.sqrt(3) / 2)


def test_rotation_fixes_its_center():
    rotation = Isometry.rotation_by(Angle.exact(1, 2), (1, 1))
    assert rotation.apply((1, 1)) == (1, 1)
    assert rotation.apply((2, 1)) == (1, 2)


def test_exact_composition_stays_exact():
    g = Isometry(rotation=Angle.exact(1, 2), translation=(Fraction(1, 2), 0))
    h = Isometry.translation_by(Fraction(1, 3), 1)
    product = g @ h
    assert product.is_exact
    assert product.translation == (Fraction(-1, 2), Fraction(1, 3))


def test_inverse():
    g = Isometry(rotation=Angle.exact(1, 2), reflect=True, translation=(2, -1))
    assert (g @ g.inverse()).is_linear_identity()
    assert (g @ g.inverse()).translation == (0, 0)
    assert g.inverse().apply(g.apply((3, 5))) == (3, 5)


def test_reflection_in_rational_line_is_exact():
    reflection = Isometry.reflection_in_line((0, 0), (1, 2))
    assert reflection.reflect
    assert reflection.cos_sin == (Fraction(-3, 5), Fraction(4, 5))
    assert reflection.apply((1, 2)) == (1, 2)


def test_reflection_in_horizontal_line():
    reflection = Isometry.reflection_in_line((0, Fraction(1, 2)), (1, 0), Angle.zero())
    assert reflection.apply((3, 0)) == (3, 1)


def test_act_on_angle():
    rotation = Isometry(rotation=Angle.exact(1, 2))
    mirror = Isometry(rotation=Angle.zero(), reflect=True)
    assert rotation.act_on_angle(Angle.exact(1, 4)).pi_units == Fraction(3, 4)
    assert mirror.act_on_angle(Angle.exact(1, 3)).pi_units == Fraction(5, 3)


def test_linear_key_distinguishes_reflections():
    rotation = Isometry(rotation=Angle.exact(1))
    reflection = Isometry(rotation=Angle.exact(1), reflect=True)
    assert rotation.linear_key() != reflection.linear_key()
    assert rotation.linear_key() == Isometry(rotation=Angle.exact(3)).linear_key()


def test_describe():
    assert Isometry.identity().describe() == "identity"
    assert Isometry(rotation=Angle.exact(1, 2)).describe() == "rotation(1/2)"
