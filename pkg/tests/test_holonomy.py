"""Tests for developing maps and rotational holonomy."""

from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.errors import IrrationalSurface
from polysurf.geometry import double_surface
from polysurf.holonomy import (
    developing_frames,
    generated_subgroup,
    n_of_surface,
    predicted_order,
    rotational_holonomy,
    subgroups,
)
from polysurf.isometry import Isometry


class TestFrames:
    def test_torus_loops_are_translations(self, torus):
        frames = developing_frames(torus)
        assert len(frames.loops) == 2
        assert all(hol.is_linear_identity() for _, hol in frames.loops)
        assert frames.reflections == []

    def test_square_table_reflects_in_every_side(self, square_table):
        frames = developing_frames(square_table)
        assert len(frames.reflections) == 4


class TestGroups:
    def test_torus_is_trivial(self, torus):
        group = rotational_holonomy(torus)
        assert group.is_trivial
        assert group.describe() == "trivial"

    def test_square_table(self, square_table):
        group = rotational_holonomy(square_table)
        assert group.describe() == "D_2"
        assert group.order == 4
        assert n_of_surface(group) == 2

    def test_pillowcase_is_cyclic(self, square_table):
        group = rotational_holonomy(double_surface(square_table))
        assert group.describe() == "C_2"
        assert not group.has_reflection

    def test_slit_torus(self, slit_torus):
        group = rotational_holonomy(slit_torus)
        assert n_of_surface(group) == 1
        assert group.describe() == "D_1"

    def test_rectangle_band(self, rect_band):
        assert n_of_surface(rect_band) == 2

    @pytest.mark.parametrize(
        "theta, expected", [("1/3", 6), ("1/4", 4), ("1/5", 10), ("1/2", 2)]
    )
    def test_tilted_rectangle(self, theta, expected):
        assert n_of_surface(make_family("band_tilted_rect", theta=theta)) == expected

    def test_polygons(self):
        assert n_of_surface(make_family("polygon")) == 5
        assert n_of_surface(make_family("polygon", angles="1/2,1/4,1/4")) == 4

    def test_cap(self):
        band = make_family("band_tilted_rect", theta="1/3")
        group = rotational_holonomy(band, cap=4)
        assert not group.is_finite
        assert group.elements == ()
        with pytest.raises(IrrationalSurface):
            n_of_surface(group)

    def test_inexact_generators_are_undecided(self):
        barrier = make_family("torus_barrier", l="1/2", eta="rad:0.5")
        assert not rotational_holonomy(barrier).is_finite


class TestSubgroups:
    def test_predicted_order(self):
        generators = [
            Isometry(rotation=Angle.zero(), reflect=True),
            Isometry(rotation=Angle.exact(2, 3), reflect=True),
        ]
        assert predicted_order(generators) == (3, True)
        assert predicted_order([Isometry(rotation=Angle.exact(1, 2))]) == (4, False)

    def test_subgroups_of_d2(self, square_table):
        group = rotational_holonomy(square_table)
        found = subgroups(group)
        assert [len(g.elements) for g in found] == [1, 2, 2, 2, 4]
        assert sum(1 for g in found if g.describe() == "D_1") == 2

    def test_generated_subgroup(self, square_table):
        group = rotational_holonomy(square_table)
        half_turn = Isometry(rotation=Angle.exact(1))
        generated = generated_subgroup(group, [half_turn])
        assert generated.describe() == "C_2"
        assert group.index_of(half_turn) == (1, 0)

    def test_rotation_labels(self, rect_band):
        group = rotational_holonomy(rect_band)
        assert {g.rotation.pi_units for g in group.rotations} == {Fraction(0), Fraction(1)}
