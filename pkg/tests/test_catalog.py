"""Tests for the surface catalog."""

from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.catalog import (
    FamilySpec,
    angle_parameters,
    get_family,
    list_families,
    make_family,
    polygon_sides,
    quotient_of,
)
from polysurf.errors import BarrierCollision, NotPeriodic, ParamOutOfRange, UnknownFamily
from polysurf.geometry import Window, euler_characteristic, validate_conditions
from polysurf.holonomy import rotational_holonomy


class TestRegistry:
    def test_families_are_sorted(self):
        names = [f.name for f in list_families()]
        assert names == sorted(names)
        for name in ("torus", "cylinder", "torus_barrier", "windtree", "polygon", "stairway"):
            assert name in names

    def test_unknown_family(self):
        with pytest.raises(UnknownFamily, match="known:"):
            get_family("klein_bottle")

    def test_unknown_parameter(self):
        with pytest.raises(ParamOutOfRange, match="unknown parameters"):
            make_family("torus", slope="1")

    def test_spec_parsing(self):
        spec = FamilySpec.parse("torus_barrier", ["l=1/3", " eta = 1/4 "])
        assert spec.params == {"l": "1/3", "eta": "1/4"}
        surface = make_family(spec)
        assert surface.metadata["params"]["l"] == "1/3"
        assert surface.metadata["family"] == "torus_barrier"

    def test_spec_needs_key_value(self):
        with pytest.raises(ParamOutOfRange):
            FamilySpec.parse("torus", ["vertical"])

    def test_angle_parameters(self):
        assert angle_parameters("cylinder_two_barriers") == ("theta1", "theta2")
        assert angle_parameters("torus") == ()


class TestCompact:
    def test_torus(self, torus):
        assert torus.boundary_edges() == []
        assert not torus.is_periodic
        assert torus.area() == pytest.approx(1.0)
        assert euler_characteristic(torus) == 0

    def test_labeled_torus(self):
        torus = make_family("torus", period="vertical")
        assert torus.is_periodic
        assert torus.period == (0, 1)

    def test_bad_period(self):
        with pytest.raises(ParamOutOfRange):
            make_family("torus", period="diagonal")

    def test_barrier_is_centered(self, slit_torus):
        barrier = [e for e in slit_torus.boundary_edges() if slit_torus.tag(e) == "barrier"]
        assert len(barrier) == 2
        points = {p for e in barrier for p in slit_torus.cell(e.cell).edge(e.edge)}
        assert points == {(Fraction(1, 4), Fraction(1, 2)), (Fraction(3, 4), Fraction(1, 2))}
        assert slit_torus.area() == pytest.approx(1.0)

    def test_zero_length_barrier_collides(self):
        with pytest.raises(BarrierCollision, match="coincide"):
            make_family("torus_barrier", l="0")
        with pytest.raises(BarrierCollision):
            make_family("band_barriers", l="0")

    def test_negative_barrier_length(self):
        with pytest.raises(ParamOutOfRange):
            make_family("torus_barrier", l="-1/2")


class TestPeriodic:
    def test_rectangle_band(self, rect_band):
        assert rect_band.is_periodic
        assert rect_band.period == (1, 0)
        assert rect_band.area() == pytest.approx(7 / 8)
        tags = {rect_band.tag(e) for e in rect_band.boundary_edges()}
        assert tags == {"wall", "obstacle"}

    def test_crossing_barriers(self):
        with pytest.raises(BarrierCollision):
            make_family(
                "cylinder_two_barriers",
                a1="1/4", b1="1/2", l1="1/2", theta1="0",
                a2="1/2", b2="1/4", l2="1/2", theta2="1/2",
            )

    def test_horizontal_barrier_length(self):
        with pytest.raises(ParamOutOfRange):
            make_family("band_horizontal_barriers", l="2")

    def test_tilted_rectangle_must_fit(self):
        with pytest.raises(ParamOutOfRange, match="leaves the unit cell"):
            make_family("band_tilted_rect", a="9/10", b="9/10")

    def test_rotated_band_period(self):
        band = make_family("band_rotated_obstacles", alpha="1/2")
        assert band.period == (4, 0)
        assert band.area() == pytest.approx(4 * (1 - 1 / 32))

    def test_irrational_rotation_is_lazy(self):
        band = make_family("band_rotated_obstacles", alpha="rad:1")
        assert band.is_lazy
        with pytest.raises(NotPeriodic):
            quotient_of(band)

    def test_staircase(self):
        assert len(make_family("origami_staircase", rows=4).cells) == 12
        with pytest.raises(ParamOutOfRange):
            make_family("origami_staircase", rows=0)


class TestQuotient:
    def test_labels_are_forgotten(self, rect_band):
        quotient = quotient_of(rect_band)
        assert not quotient.is_periodic
        assert len(quotient.cells) == len(rect_band.cells)
        assert quotient.name.endswith("/Z")

    def test_lazy_band_uses_its_quotient(self):
        band = make_family("band_rotated_obstacles", alpha="1/2", lazy=1)
        assert band.is_lazy
        assert len(quotient_of(band).cells) == len(make_family("band_rotated_obstacles").cells)

    def test_compact_surface(self, torus):
        with pytest.raises(NotPeriodic):
            quotient_of(torus)


class TestStairway:
    def test_geometric_heights(self):
        stairs = make_family("stairway", ratio="1/2", steps=3)
        assert len(stairs.cells) == 3
        assert stairs.area() == pytest.approx(1.75)
        assert len(stairs.gluings()) == 2

    def test_listed_heights(self):
        stairs = make_family("stairway", heights="1,2,1")
        assert stairs.area() == pytest.approx(4.0)

    def test_lazy_needs_a_ratio(self):
        with pytest.raises(ParamOutOfRange):
            make_family("stairway", heights="1,2", lazy=1)

    def test_lazy(self):
        assert make_family("stairway", ratio="1/2", lazy=1).is_lazy

    def test_constant_heights_make_a_band(self):
        stairs = make_family("stairway", ratio="1", steps=6)
        assert stairs.area() == pytest.approx(6.0)
        assert all(max(float(y) for _, y in c.vertices) == 1 for c in stairs.cells.values())
        band = make_family("stairway", ratio="1", lazy=1)
        report = validate_conditions(band, Window(0, 10, 0, 1))
        assert report.ok
        assert report.min_side == pytest.approx(1.0)

    def test_no_steps(self):
        with pytest.raises(ParamOutOfRange):
            make_family("stairway", steps=0)


class TestPlane:
    def test_windtree_holonomy_ignores_the_window(self):
        windtree = make_family("windtree")
        assert windtree.is_lazy
        assert rotational_holonomy(windtree).describe() == "D_2"

    def test_polygon_needs_three_vertices(self):
        with pytest.raises(ParamOutOfRange):
            make_family("plane_obstacles", polygon="0,0;1,1")


class TestPolygons:
    def test_square_sides(self):
        sides = polygon_sides([Angle.exact(1, 2)] * 4)
        assert sides == pytest.approx([1.0, 1.0, 1.0, 1.0])

    def test_equilateral_triangle(self):
        surface = make_family("polygon", angles="1/3,1/3,1/3")
        (cell,) = surface.cells.values()
        lengths = [float(cell.edge_length(i)) for i in range(3)]
        assert lengths == pytest.approx([1.0, 1.0, 1.0])

    def test_double_is_closed(self):
        double = make_family("polygon", angles="1/2,1/4,1/4", double=1)
        assert double.boundary_edges() == []
        assert len(double.cells) == 2

    @pytest.mark.parametrize("angles", ["1/2,1/2,1/2", "1/2,1/2", "0,1/2,1/2"])
    def test_bad_angles(self, angles):
        with pytest.raises(ParamOutOfRange):
            make_family("polygon", angles=angles)
