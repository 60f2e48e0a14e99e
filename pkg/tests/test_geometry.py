"""Tests for cells, gluings, validation, vertices and doubling."""

from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.errors import (
    BadOrientation,
    Disconnected,
    DuplicateGluing,
    EmptyGlueSet,
    InvalidCell,
    LengthMismatch,
    MapMismatch,
    UnknownEdge,
)
from polysurf.geometry import (
    Cell,
    EdgeRef,
    Gluing,
    VertexKind,
    Window,
    build_surface,
    corner_fan,
    double_surface,
    doubling_projection,
    euler_characteristic,
    validate_conditions,
    vertex_angles,
)
from polysurf.isometry import Isometry

SQUARE_HEADINGS = (Angle.zero(), Angle.exact(1, 2), Angle.exact(1), Angle.exact(3, 2))


def square(cid, x=0, y=0):
    return Cell(cid, ((x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)), SQUARE_HEADINGS)


class TestCell:
    def test_corner_angles_of_a_square(self):
        cell = square(0)
        assert all(cell.corner_angle(i).pi_units == Fraction(1, 2) for i in range(4))

    def test_area_is_exact(self):
        cell = Cell(0, ((0, 0), (Fraction(1, 2), 0), (0, Fraction(1, 3))))
        assert cell.area() == Fraction(1, 12)

    def test_reflected_copy_stays_counterclockwise(self):
        mirror = Isometry.reflection_in_line((0, 0), (1, 0), Angle.zero())
        image = square(0).transformed(mirror, "m")
        assert image.area() == 1
        assert image.heading(0).pi_units == 0

    def test_contains(self):
        cell = square(0)
        assert cell.contains((0.5, 0.5))
        assert cell.contains((1.0, 0.3))
        assert not cell.contains((1.5, 0.5))


class TestValidation:
    def test_clockwise_cell(self):
        cell = Cell(0, ((0, 0), (0, 1), (1, 1), (1, 0)))
        with pytest.raises(InvalidCell):
            build_surface([cell])

    def test_too_few_vertices(self):
        with pytest.raises(InvalidCell):
            build_surface([Cell(0, ((0, 0), (1, 0)))])

    def test_length_mismatch(self):
        wide = Cell(1, ((0, 0), (2, 0), (2, 1), (0, 1)))
        gluing = Gluing(EdgeRef(0, 0), EdgeRef(1, 0), Isometry.translation_by(0, 0))
        with pytest.raises(LengthMismatch):
            build_surface([square(0), wide], [gluing])

    def test_bad_orientation(self):
        # translating the right side onto the left of the next square keeps both on one side
        gluing = Gluing(EdgeRef(0, 1), EdgeRef(1, 1), Isometry.translation_by(1, 0))
        with pytest.raises(BadOrientation):
            build_surface([square(0), square(1, 1)], [gluing])

    def test_map_mismatch(self):
        gluing = Gluing(EdgeRef(0, 1), EdgeRef(0, 3), Isometry.translation_by(-2, 0))
        with pytest.raises(MapMismatch):
            build_surface([square(0)], [gluing])

    def test_unknown_edge(self):
        gluing = Gluing(EdgeRef(0, 1), EdgeRef(5, 3), Isometry.translation_by(-1, 0))
        with pytest.raises(UnknownEdge):
            build_surface([square(0)], [gluing])

    def test_duplicate_gluing(self):
        first = Gluing(EdgeRef(0, 1), EdgeRef(0, 3), Isometry.translation_by(-1, 0))
        second = Gluing(EdgeRef(0, 1), EdgeRef(1, 3), Isometry.translation_by(0, 0))
        with pytest.raises(DuplicateGluing):
            build_surface([square(0), square(1, 1)], [first, second])

    def test_disconnected(self):
        with pytest.raises(Disconnected):
            build_surface([square(0), square(1, 3)])

    def test_identity_gluing_of_neighbors(self):
        gluing = Gluing(EdgeRef(0, 1), EdgeRef(1, 3), Isometry.identity())
        surface = build_surface([square(0), square(1, 1)], [gluing])
        assert len(surface.boundary_edges()) == 6
        assert surface.partner(EdgeRef(1, 3)).side_b == EdgeRef(0, 1)


class TestVertices:
    def test_torus_has_one_regular_vertex(self, torus):
        classes = vertex_angles(torus)
        assert len(classes) == 1
        (vertex,) = classes.values()
        assert vertex.kind == VertexKind.REGULAR_INTERIOR
        assert vertex.total_angle.pi_units == 2

    def test_square_table_corners_are_wedges(self, square_table):
        classes = vertex_angles(square_table)
        assert len(classes) == 4
        assert all(v.kind == VertexKind.WEDGE_POINT for v in classes.values())

    def test_slit_endpoints_are_wedges_of_angle_two_pi(self, slit_torus):
        wedges = [v for v in vertex_angles(slit_torus).values() if v.is_singular]
        assert len(wedges) == 2
        assert all(v.total_angle.pi_units == 2 for v in wedges)
        assert all(v.kind == VertexKind.WEDGE_POINT for v in wedges)

    def test_corner_fan_closes_around_torus_vertex(self, torus):
        fan = corner_fan(torus, 0, 0)
        assert not fan.boundary
        assert len(fan.corners) == 4
        assert fan.kind == VertexKind.REGULAR_INTERIOR

    def test_euler_characteristic(self, torus, square_table):
        assert euler_characteristic(torus) == 0
        assert euler_characteristic(double_surface(square_table)) == 2


class TestDoubling:
    def test_pillowcase(self, square_table):
        double = double_surface(square_table)
        assert double.boundary_edges() == []
        classes = vertex_angles(double)
        assert len(classes) == 4
        assert all(v.kind == VertexKind.CONE_POINT for v in classes.values())
        assert all(v.total_angle.pi_units == 1 for v in classes.values())

    def test_projection_is_two_to_one(self, square_table):
        projection = doubling_projection(double_surface(square_table))
        assert sorted(projection.values()) == [0, 0]

    def test_keep_open(self, square_table):
        bottom = EdgeRef(0, 0)
        double = double_surface(square_table, keep_open=[bottom])
        assert len(double.boundary_edges()) == 2

    def test_keeping_everything_open_fails(self, square_table):
        with pytest.raises(EmptyGlueSet):
            double_surface(square_table, keep_open=square_table.boundary_edges())

    def test_keep_open_must_be_boundary(self, torus):
        with pytest.raises(UnknownEdge):
            double_surface(torus, keep_open=[EdgeRef(0, 0)])


class TestConditions:
    def test_rect_band(self, rect_band):
        report = validate_conditions(rect_band, Window(-1, 2, -1, 2))
        assert report.ok
        # walls, plus the four sides of the obstacle
        assert report.min_side == pytest.approx(0.25)
        assert report.max_multiplicity == 2

    def test_short_side_is_flagged(self, rect_band):
        report = validate_conditions(rect_band, Window(-1, 2, -1, 2), threshold=0.3)
        assert report.min_side_flag
        assert not report.ok

    def test_unit_square(self, square_table):
        report = validate_conditions(square_table, Window(-1, 2, -1, 2))
        assert report.sides_met == 4
        assert report.min_side == pytest.approx(1.0)
        assert report.max_multiplicity == 1

    def test_torus_corner_has_four_preimages(self, torus):
        assert validate_conditions(torus, Window(-1, 2, -1, 2)).max_multiplicity == 4

    def test_descending_stairway_has_short_sides(self):
        stairs = make_family("stairway", ratio="1/2", lazy=1)
        report = validate_conditions(stairs, Window.square(10))
        assert report.min_side_flag
        assert report.min_side < 2**-8
        assert report.max_multiplicity == 1

    def test_lazy_surface_is_restricted(self):
        band = make_family("band_rotated_obstacles", lazy=1)
        report = validate_conditions(band, Window(-1.5, 1.5, 0, 1))
        assert report.sides_met > 0
