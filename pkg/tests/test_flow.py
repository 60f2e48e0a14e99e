"""Tests for tracing, cross sections and section measures."""

import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.errors import OffSection
from polysurf.flow import (
    CrossSectionPoint,
    EventKind,
    TangentState,
    Tracer,
    billiard_map,
    directional_orbit,
    inward_pairs,
    sample_section,
    section_partition,
    section_return,
    trace,
    transversality_measure,
)
from polysurf.geometry import EdgeRef
from polysurf.holonomy import rotational_holonomy


def locate(surface, point):
    """Id of the cell whose interior holds ``point``."""
    (cid,) = [c for c in surface.cell_ids() if surface.cell(c).contains(point, tol=0.0)]
    return cid


class TestTracing:
    def test_torus_crossings(self, torus):
        state = TangentState.start(0, (0.5, 0.5), Angle.zero())
        events = trace(torus, state, max_length=2.0)
        assert [e.kind for e in events] == [
            EventKind.CROSSING,
            EventKind.CROSSING,
            EventKind.TIMEOUT,
        ]
        assert events[0].state.point == pytest.approx((0.0, 0.5))
        assert events[-1].state.point == pytest.approx((0.5, 0.5))
        assert events[-1].state.time == pytest.approx(2.0)

    def test_travel(self, torus):
        state = TangentState.start(0, (0.25, 0.5), Angle.exact(1, 2))
        after = Tracer(torus).travel(state, 0.75)
        assert after.point == pytest.approx((0.25, 0.25))
        assert after.heading == Angle.exact(1, 2)

    def test_displacement_counts_labeled_crossings(self):
        torus = make_family("torus", period="horizontal")
        state = TangentState.start(0, (0.5, 0.5), Angle.zero())
        events = trace(torus, state, max_length=3.2)
        assert events[-1].state.displacement == 3
        backwards = trace(torus, TangentState.start(0, (0.5, 0.5), Angle.exact(1)), max_length=3.2)
        assert backwards[-1].state.displacement == -3

    def test_reflection_off_a_barrier(self, slit_torus):
        start = (0.5, 0.2)
        state = TangentState.start(locate(slit_torus, start), start, Angle.exact(1, 2))
        event = Tracer(slit_torus).advance(state)
        assert event.kind == EventKind.REFLECTION
        assert event.state.point == pytest.approx((0.5, 0.5))
        assert event.state.heading == Angle.exact(3, 2)
        assert event.edge is not None and slit_torus.tag(event.edge) == "barrier"

    def test_singular_hit_at_barrier_end(self, slit_torus):
        start = (0.1, 0.1)
        state = TangentState.start(locate(slit_torus, start), start, Angle.from_vector(0.15, 0.4))
        events = trace(slit_torus, state, max_events=10)
        assert events[-1].kind == EventKind.SINGULAR_HIT
        assert events[-1].state.point == pytest.approx((0.25, 0.5))

    def test_exact_heading_survives_many_reflections(self, square_table):
        state = TangentState.start(0, (0.3, 0.0), Angle.exact(1, 3))
        events = trace(square_table, state, max_events=200, max_length=1e9)
        assert all(
            e.state.heading is not None and e.state.heading.is_exact
            for e in events
            if e.kind == EventKind.REFLECTION
        )


def test_diagonal_passes_through_the_torus_corner(torus, caplog):
    caplog.set_level(logging.DEBUG, logger="polysurf.flow")
    state = TangentState.start(0, (0.5, 0.5), Angle.exact(1, 4))
    events = trace(torus, state, max_length=1.0)
    assert events[0].kind == EventKind.CROSSING
    assert events[0].target is None
    assert events[0].vertex == (0, 2)
    assert "passing through regular vertex" in caplog.text


class TestSections:
    def test_square_billiard(self, square_table):
        point = CrossSectionPoint(EdgeRef(0, 0), 0.3, Angle.exact(1, 4))
        hit = section_return(square_table, point)
        assert hit.point.edge == EdgeRef(0, 1)
        assert hit.point.arclength == pytest.approx(0.7)
        assert hit.point.direction == Angle.exact(3, 4)
        assert hit.flight_time == pytest.approx(0.7 * math.sqrt(2))
        second = billiard_map(hit.point, square_table)
        assert second.edge == EdgeRef(0, 2)
        assert second.arclength == pytest.approx(0.3)
        assert second.direction == Angle.exact(5, 4)

    def test_direction_must_point_inward(self, square_table):
        point = CrossSectionPoint(EdgeRef(0, 0), 0.3, Angle.exact(3, 2))
        with pytest.raises(OffSection):
            section_return(square_table, point)

    def test_parallel_direction_is_not_a_start(self, square_table):
        point = CrossSectionPoint(EdgeRef(0, 0), 0.3, Angle.zero())
        with pytest.raises(OffSection, match="does not point into"):
            billiard_map(point, square_table)

    def test_arclength_must_lie_on_the_edge(self, square_table):
        point = CrossSectionPoint(EdgeRef(0, 0), 1.5, Angle.exact(1, 4))
        with pytest.raises(OffSection):
            section_return(square_table, point)

    def test_period_section_partition(self):
        torus = make_family("torus", period="vertical")
        up = section_partition(torus, EdgeRef(0, 0), Angle.exact(1, 3), "period")
        assert len(up) == 1
        assert up[0].phi == 1
        assert up[0].width == pytest.approx(1.0)
        down = section_partition(torus, EdgeRef(0, 2), Angle.exact(4, 3), "period")
        assert [piece.phi for piece in down] == [-1]


class TestDirectionalOrbits:
    def test_generic_direction(self, rect_band):
        group = rotational_holonomy(rect_band)
        orbit = directional_orbit(Angle.exact(1, 5), group)
        assert [a.pi_units for a in orbit.angles] == [
            Fraction(1, 5),
            Fraction(4, 5),
            Fraction(6, 5),
            Fraction(9, 5),
        ]
        assert not orbit.singular

    def test_wall_direction_is_singular(self, rect_band):
        orbit = directional_orbit(Angle.zero(), rotational_holonomy(rect_band))
        assert len(orbit.angles) == 2
        assert orbit.singular

    def test_barrier_direction_is_singular(self, slit_torus):
        orbit = directional_orbit(Angle.zero(), rotational_holonomy(slit_torus))
        assert orbit.singular
        assert orbit.contains(Angle.exact(2))


class TestMeasure:
    @pytest.mark.parametrize(
        "theta, expected",
        [(Angle.exact(1, 2), Fraction(1, 2)), (Angle.exact(1, 6), Fraction(1, 4))],
    )
    def test_slit_formula(self, slit_torus, theta, expected):
        estimate = transversality_measure(theta, slit_torus)
        assert estimate.exact
        assert estimate.value == expected

    def test_parallel_direction_has_zero_measure(self, slit_torus):
        assert transversality_measure(Angle.zero(), slit_torus).value == 0

    @pytest.mark.parametrize("eta", ["1/3", "1/4", "2/3"])
    def test_slit_formula_at_other_angles(self, eta):
        surface = make_family("torus_barrier", l="1/2", eta=eta)
        theta = Angle.exact(1, 2)
        expected = 0.5 * abs(math.sin(theta.to_radians() - Angle.parse(eta).to_radians()))
        estimate = transversality_measure(theta, surface)
        assert float(estimate.value) == pytest.approx(expected)

    def test_inexact_lengths_give_float(self, rect_band):
        estimate = transversality_measure(Angle.exact(1, 4), rect_band)
        assert not estimate.exact
        assert estimate.value == pytest.approx(3.5 * math.sqrt(2) / 4)

    def test_monte_carlo_agrees(self, slit_torus):
        estimate = transversality_measure(
            Angle.exact(1, 2), slit_torus, method="mc", samples=500, seed=3
        )
        assert abs(estimate.value - 0.5) <= 5 * estimate.stderr + 1e-3

    def test_unknown_method(self, slit_torus):
        with pytest.raises(ValueError):
            transversality_measure(Angle.exact(1, 2), slit_torus, method="guess")


def test_sample_section_stays_on_edges(slit_torus):
    orbit = directional_orbit(Angle.exact(1, 2), rotational_holonomy(slit_torus))
    pairs = inward_pairs(slit_torus, orbit)
    assert len(pairs) == 2
    points = sample_section(np.random.default_rng(0), pairs, 50)
    assert len(points) == 50
    for point in points:
        assert point.edge in {p.edge for p in pairs}
        assert 0 <= point.arclength <= 0.5
