"""Tests for translation covers, square tilings and periodic covers."""

import math
from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.errors import NontrivialHolonomy, NotLatticeDrawn, NotPeriodic, NotSquareTiled
from polysurf.geometry import EdgeRef, euler_characteristic
from polysurf.holonomy import rotational_holonomy
from polysurf.unfolding import (
    SquareTiling,
    branching_report,
    canonical_translation_cover,
    classify_direction,
    intermediate_cover,
    is_square_tiled,
    origami_from_polygon,
    periodic_cover,
)


class TestCovers:
    def test_square_table_unfolds_to_a_torus(self, square_table):
        cover = canonical_translation_cover(square_table)
        assert cover.degree == 4
        assert cover.total.boundary_edges() == []
        assert euler_characteristic(cover.total) == 0
        report = branching_report(cover)
        assert len(report) == 4
        assert all(point.ratio == 4 for point in report)

    def test_slit_torus_doubles(self, slit_torus):
        cover = canonical_translation_cover(slit_torus)
        assert cover.degree == 2
        assert cover.total.boundary_edges() == []
        assert max(point.ratio for point in branching_report(cover)) == 2

    def test_full_subgroup_gives_the_surface_back(self, square_table):
        group = rotational_holonomy(square_table)
        cover = intermediate_cover(square_table, subgroup=group, group=group)
        assert cover.degree == 1
        assert len(cover.total.boundary_edges()) == 4

    def test_projection(self, square_table):
        cover = canonical_translation_cover(square_table)
        for cid in cover.total.cell_ids():
            assert cover.project_edge(EdgeRef(cid, 0)).cell == 0

    def test_triangle_cover_degree(self):
        triangle = make_family("polygon", angles="1/2,1/4,1/4")
        assert canonical_translation_cover(triangle).degree == 8


class TestSquareTiling:
    def test_torus(self, torus):
        tiling = is_square_tiled(torus)
        assert isinstance(tiling, SquareTiling)
        assert len(tiling) == 1
        assert tiling.scale == (1, 1)
        assert tiling.rows() == [[0]]

    def test_staircase_rows(self):
        tiling = is_square_tiled(make_family("origami_staircase", rows=10))
        assert isinstance(tiling, SquareTiling)
        assert len(tiling) == 30
        assert len(tiling.rows()) == 10
        assert all(len(row) == 3 for row in tiling.rows())

    def test_rational_band_is_arithmetic(self, rect_band):
        cover = canonical_translation_cover(rect_band)
        assert isinstance(is_square_tiled(cover.total), SquareTiling)

    def test_irrational_band_is_not(self):
        band = make_family("band_rect_obstacles", b=math.sqrt(2) / 4)
        cover = canonical_translation_cover(band)
        assert isinstance(is_square_tiled(cover.total), NotSquareTiled)

    def test_needs_a_translation_surface(self, slit_torus):
        with pytest.raises(NontrivialHolonomy):
            is_square_tiled(slit_torus)


class TestOrigami:
    def test_rows_and_columns_close_up(self):
        surface = origami_from_polygon([(0, 0), (1, 0), (0, 1)])
        assert surface.boundary_edges() == []
        assert len(surface.cells) == 3

    def test_repeated_square(self):
        with pytest.raises(NotLatticeDrawn):
            origami_from_polygon([(0, 0), (0, 0)])

    def test_empty(self):
        with pytest.raises(NotLatticeDrawn):
            origami_from_polygon([])

    def test_periodic_staircase_has_shift_labels(self):
        staircase = make_family("origami_staircase")
        assert staircase.is_periodic
        assert staircase.period == (-1, 1)


class TestDirections:
    @pytest.mark.parametrize(
        "angle, expected",
        [
            (Angle.exact(1, 4), "Rational(1)"),
            (Angle.exact(1, 2), "Rational(inf)"),
            (Angle.zero(), "Rational(0)"),
            (Angle.exact(1, 3), "Irrational"),
        ],
    )
    def test_exact_angles(self, angle, expected):
        assert classify_direction(angle).describe() == expected

    def test_inexact_angle(self):
        result = classify_direction(Angle.radians(0.5))
        assert not result.rational
        assert result.inexact

    def test_slope(self):
        result = classify_direction(Fraction(2, 3))
        assert result.rational
        assert result.slope == Fraction(2, 3)


class TestPeriodicCover:
    def test_crossing_moves_one_block(self):
        quotient = make_family("cylinder")
        cover = periodic_cover(quotient)
        assert cover.is_lazy
        (shifted,) = [g for g in quotient.gluings() if g.shift != 0]
        start = EdgeRef(f"{shifted.side_a.cell}@0", shifted.side_a.edge)
        partner = cover.partner(start)
        assert partner is not None
        assert partner.side_b.cell == f"{shifted.side_b.cell}@{shifted.shift}"

    def test_compact_surface_is_rejected(self, torus):
        with pytest.raises(NotPeriodic):
            periodic_cover(torus)
