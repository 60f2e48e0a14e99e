"""Cross-module checks on the catalog: parity of N, covers, doubles and closed orbits."""

from fractions import Fraction

import pytest

from polysurf.angles import Angle
from polysurf.catalog import make_family, quotient_of
from polysurf.flow import EventKind, TangentState, trace
from polysurf.geometry import VertexKind, vertex_angles
from polysurf.holonomy import n_of_surface, rotational_holonomy
from polysurf.skew import SkewSystem, centering_integral, rational_grid
from polysurf.unfolding import canonical_translation_cover


@pytest.mark.parametrize("theta", rational_grid(12))
def test_tilted_rectangle_n_is_even(theta):
    n = Fraction(theta).denominator
    expected = n if n % 2 == 0 else 2 * n
    assert n_of_surface(make_family("band_tilted_rect", theta=theta)) == expected


@pytest.mark.parametrize(
    "name, params, n",
    [
        ("band_rect_obstacles", {}, 2),
        ("torus_barrier", {"l": "1/2", "eta": "0"}, 1),
        ("torus_barrier", {"l": "1/3", "eta": "1/4"}, 1),
    ],
)
def test_canonical_cover_is_a_translation_surface(name, params, n):
    surface = make_family(name, **params)
    if surface.is_periodic:
        surface = quotient_of(surface)
    cover = canonical_translation_cover(surface)
    assert cover.degree == 2 * n
    assert cover.total.boundary_edges() == []
    assert rotational_holonomy(cover.total).is_trivial


def test_doubled_pentagon_has_five_cone_points():
    double = make_family("polygon", double=1)
    cones = [v for v in vertex_angles(double).values() if v.kind == VertexKind.CONE_POINT]
    assert len(cones) == 5
    assert all(v.total_angle.pi_units == Fraction(6, 5) for v in cones)


@pytest.mark.parametrize("theta", ["1/7", "2/7", "1/9", "3/11", "5/13"])
def test_rectangle_band_is_centered(rect_band, theta):
    estimate = centering_integral(SkewSystem(rect_band), Angle.parse(theta))
    assert abs(estimate.mean) < 1e-9


@pytest.mark.parametrize("heading", [Angle.zero(), Angle.exact(1, 2)])
def test_staircase_rows_and_columns_close_up(heading):
    staircase = make_family("origami_staircase", rows=10)
    (cid,) = [c for c in staircase.cell_ids() if staircase.cell(c).contains((0.5, 0.5), tol=0.0)]
    events = trace(staircase, TangentState.start(cid, (0.5, 0.5), heading), max_length=3.0)
    assert [e.kind for e in events].count(EventKind.CROSSING) == 3
    assert events[-1].kind == EventKind.TIMEOUT
    assert events[-1].state.cell == cid
    assert events[-1].state.point == pytest.approx((0.5, 0.5))
