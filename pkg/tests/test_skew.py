"""Tests for the displacement cocycle, centering and recurrence experiments."""

import math

import numpy as np
import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.errors import NonTransversal, NotPeriodic
from polysurf.flow import CrossSectionPoint
from polysurf.geometry import EdgeRef
from polysurf.skew import (
    OrbitRecord,
    RecurrenceReport,
    SkewSystem,
    Thresholds,
    Verdict,
    amenability_check,
    centering_integral,
    displacement_return,
    escape_test,
    iterate_returns,
    rational_grid,
    recurrence_experiment,
    summarize_orbit,
)

BOTTOM = EdgeRef(0, 0)
TOP = EdgeRef(0, 2)


@pytest.fixture
def torus_system():
    """Unit torus cut along y = 0; crossing it upward adds one."""
    return SkewSystem(make_family("torus", period="vertical"), section="period")


@pytest.fixture
def barrier_band():
    return SkewSystem(make_family("band_horizontal_barriers"), section="period")


def circle_distance(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def random_torus_starts(count, seed):
    """Uniform (arclength, angle) pairs, angles kept away from the horizontal."""
    rng = np.random.default_rng(seed)
    xs = rng.random(count)
    thetas = rng.uniform(0.1, math.pi - 0.1, count)
    thetas = np.where(rng.random(count) < 0.5, thetas, thetas + math.pi)
    return zip(xs.tolist(), thetas.tolist())


def check_torus_oracle(system, count, seed):
    for x, theta in random_torus_starts(count, seed):
        upward = math.sin(theta) > 0
        start = CrossSectionPoint(BOTTOM if upward else TOP, x, Angle.radians(theta))
        record = displacement_return(system, start)
        expected = (x + math.cos(theta) / math.sin(theta)) % 1.0
        assert record.end.edge == start.edge
        assert circle_distance(record.end.arclength, expected) < 1e-10
        assert record.phi == (1 if upward else -1)


class TestTorusSection:
    def test_matches_closed_form(self, torus_system):
        check_torus_oracle(torus_system, 200, seed=13)

    @pytest.mark.slow
    def test_matches_closed_form_at_scale(self, torus_system):
        check_torus_oracle(torus_system, 10_000, seed=14)

    def test_iterates_compose(self, torus_system):
        theta = Angle.radians(1.0)
        records = iterate_returns(torus_system, CrossSectionPoint(BOTTOM, 0.2, theta), 5)
        cot = 1.0 / math.tan(1.0)
        assert circle_distance(records[-1].end.arclength, 0.2 + 5 * cot) < 1e-10
        assert sum(r.phi for r in records) == 5

    def test_constant_sign_orbit_escapes(self, torus_system):
        report = recurrence_experiment(
            torus_system, Angle.radians(1.0), n_orbits=3, n_returns=120, seed=1
        )
        assert report.verdict == Verdict.TRANSIENT

    def test_centering_of_an_upward_direction_is_one(self, torus_system):
        estimate = centering_integral(torus_system, Angle.exact(1, 3))
        assert estimate.mean == pytest.approx(1.0)


class TestBarrierBand:
    @pytest.mark.parametrize("theta", [Angle.exact(1, 6), Angle.exact(1, 4), Angle.exact(1, 3)])
    def test_every_period_crossing_is_positive(self, barrier_band, theta):
        report = recurrence_experiment(barrier_band, theta, n_orbits=5, n_returns=120, seed=7)
        assert report.verdict == Verdict.TRANSIENT
        assert all(o.final == 120 for o in report.orbits)
        assert report.n_escaped == 5

    def test_pairs_sit_on_one_side(self, barrier_band):
        pairs = barrier_band.pairs(Angle.exact(1, 3))
        assert len({p.edge for p in pairs}) == 1
        assert len(pairs) == 2

    def test_quadrature_mean_is_one(self, barrier_band):
        estimate = centering_integral(barrier_band, Angle.exact(1, 4))
        assert estimate.mean == pytest.approx(1.0)
        assert estimate.pieces >= 2

    def test_monte_carlo_mean_is_one(self, barrier_band):
        estimate = centering_integral(barrier_band, Angle.exact(1, 4), method="mc", samples=40)
        assert estimate.mean == 1.0
        assert estimate.stderr == 0.0

    def test_parallel_direction_is_not_transversal(self, barrier_band):
        with pytest.raises(NonTransversal):
            centering_integral(barrier_band, Angle.exact(1, 2))

    def test_workers_do_not_change_the_report(self, barrier_band):
        kwargs = dict(n_orbits=4, n_returns=20, seed=3)
        serial = recurrence_experiment(barrier_band, Angle.exact(1, 4), workers=1, **kwargs)
        parallel = recurrence_experiment(barrier_band, Angle.exact(1, 4), workers=2, **kwargs)
        assert serial.orbits == parallel.orbits


class TestCentering:
    def test_symmetric_band_is_centered(self, rect_band):
        estimate = centering_integral(SkewSystem(rect_band), Angle.exact(1, 5))
        assert abs(estimate.mean) < 1e-9

    def test_monte_carlo_within_standard_errors(self, rect_band):
        system = SkewSystem(rect_band)
        estimate = centering_integral(
            system, Angle.exact(1, 5), method="mc", samples=400, seed=2
        )
        assert abs(estimate.mean) <= 5 * estimate.stderr + 1e-9

    def test_unknown_method(self, rect_band):
        with pytest.raises(ValueError):
            centering_integral(SkewSystem(rect_band), Angle.exact(1, 5), method="guess")


class TestSystem:
    def test_compact_surface_is_rejected(self, torus):
        with pytest.raises(NotPeriodic):
            SkewSystem(torus)

    def test_default_section(self, rect_band, horizontal_band):
        assert SkewSystem(rect_band).section.kind == "boundary"
        assert SkewSystem(horizontal_band).section.kind == "boundary"
        assert SkewSystem(make_family("origami_staircase")).section.kind == "period"

    def test_lazy_surface_uses_its_quotient(self):
        band = make_family("band_rotated_obstacles", lazy=1)
        system = SkewSystem(band)
        assert not system.quotient.is_lazy


class TestOrbitSummaries:
    def test_escape(self):
        assert escape_test(list(range(1, 201)), Thresholds())
        assert not escape_test([1, 2, 3], Thresholds())
        assert not escape_test([0] * 200, Thresholds())

    def test_return_to_zero(self):
        record = summarize_orbit(0, "1/3", [1, -1, 1, 1], Thresholds(escape_window=2))
        assert record.returned_to_zero
        assert record.first_return == 2
        assert record.final == 2
        assert record.max_excursion == 2
        assert not record.escaped

    def test_empty_orbit(self):
        record = summarize_orbit(0, "?", [], Thresholds(), aborted="NoReturn")
        assert record.returns == 0
        assert record.birkhoff_mean == 0.0


def orbit(index, returned, escaped, aborted=None):
    return OrbitRecord(index, "1/3", 10, 0, 1, returned, 2 if returned else None, escaped, aborted)


class TestVerdict:
    def test_transient(self):
        assert RecurrenceReport([orbit(0, False, True)]).verdict == Verdict.TRANSIENT

    def test_recurrent(self):
        orbits = [orbit(i, True, False) for i in range(5)]
        assert RecurrenceReport(orbits).verdict == Verdict.RECURRENT

    def test_inconclusive(self):
        orbits = [orbit(0, True, False), orbit(1, False, False)]
        assert RecurrenceReport(orbits).verdict == Verdict.INCONCLUSIVE
        assert RecurrenceReport([]).verdict == Verdict.INCONCLUSIVE

    def test_aborted_orbits_are_left_out(self):
        orbits = [orbit(0, False, True), orbit(1, False, False, aborted="SingularHit")]
        report = RecurrenceReport(orbits)
        assert report.verdict == Verdict.TRANSIENT
        assert report.aborted == {"SingularHit": 1}

    def test_merge_orders_by_index(self):
        merged = RecurrenceReport([orbit(2, True, False)]).merge(
            RecurrenceReport([orbit(0, True, False), orbit(1, True, False)])
        )
        assert [o.index for o in merged.orbits] == [0, 1, 2]
        assert merged.summary()["n_orbits"] == 3


class TestAmenability:
    def test_rational_grid(self):
        assert rational_grid(4) == ["1/4", "1/3", "1/2", "2/3", "3/4"]

    def test_two_barrier_cylinder(self):
        report = amenability_check(
            "cylinder_two_barriers", {"theta2": rational_grid(4)}, fixed={"a2": "1/3"}
        )
        assert [p.n for p in report.points] == [4, 3, 2, 3, 4]
        assert report.even_fraction == pytest.approx(0.6)
        assert report.amenable

    def test_horizontal_barriers_never_even(self):
        report = amenability_check("band_horizontal_barriers", {"height": ["1/4", "1/2", "3/4"]})
        assert [p.n for p in report.points] == [1, 1, 1]
        assert not report.amenable

    def test_bad_grid_points_are_recorded(self):
        report = amenability_check("band_horizontal_barriers", {"l": ["1/2", "2"]})
        assert report.points[0].error is None
        assert report.points[1].error is not None
        assert report.even_fraction == 0.0
