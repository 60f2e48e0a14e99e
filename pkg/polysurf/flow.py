"""Event-driven geodesic and billiard flow.

States live in the chart of the cell that contains them. The tracer moves
a state to the first edge its ray meets and then either transports it
through the gluing, reflects it, or stops at a singular vertex. Exact
headings are carried along whenever the surface supplies exact edge and
gluing angles, so directions never drift on rational surfaces.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .angles import Angle, Number
from .config import get_settings
from .errors import (
    DegenerateDirection,
    EscapedCell,
    FlowError,
    InfiniteGroup,
    NoReturn,
    NotPeriodic,
    OffSection,
    SingularHitError,
)
from .geometry import (
    WINDOW_TAG,
    CellId,
    Corner,
    CornerFan,
    EdgeRef,
    Gluing,
    Surface,
    VertexKind,
    corner_fan,
    sort_key,
)
from .holonomy import RotationalGroup, developing_frames, rotational_holonomy
from .isometry import Isometry

logger = logging.getLogger(__name__)

FloatPoint = tuple[float, float]

_T_EPS = 1e-12


class EventKind(str, Enum):
    CROSSING = "crossing"
    REFLECTION = "reflection"
    SINGULAR_HIT = "singular"
    TIMEOUT = "timeout"
    WINDOW_EXIT = "window"


@dataclass(frozen=True)
class TangentState:
    """A unit tangent vector at a point of a cell, in that cell's chart."""

    cell: CellId
    point: FloatPoint
    direction: FloatPoint
    time: float = 0.0
    heading: Optional[Angle] = None  # exact direction angle, when known
    displacement: int = 0  # Z-labels crossed so far

    @classmethod
    def start(
        cls,
        cell: CellId,
        point: tuple[Number, Number],
        direction: Angle,
        displacement: int = 0,
    ) -> TangentState:
        return cls(
            cell=cell,
            point=(float(point[0]), float(point[1])),
            direction=direction.unit_vector(),
            heading=direction.normalized() if direction.is_exact else None,
            displacement=displacement,
        )

    def angle(self) -> Angle:
        if self.heading is not None:
            return self.heading
        return Angle.radians(math.atan2(self.direction[1], self.direction[0]) % (2 * math.pi))


@dataclass(frozen=True)
class TraceEvent:
    """One straight segment of a trajectory and what happened at its end.

    ``segment`` is drawn in the chart of ``segment_cell``; ``state`` is the
    state after the event. ``edge`` is the edge hit (in ``segment_cell``)
    and ``target`` the edge the state sits on afterwards.
    """

    kind: EventKind
    state: TangentState
    segment_cell: CellId
    segment: tuple[FloatPoint, FloatPoint]
    edge: Optional[EdgeRef] = None
    target: Optional[EdgeRef] = None
    shift: int = 0
    vertex: Optional[Corner] = None

    @property
    def length(self) -> float:
        (x0, y0), (x1, y1) = self.segment
        return math.hypot(x1 - x0, y1 - y0)


@dataclass
class _CellData:
    xs: list[float]
    ys: list[float]
    ex: list[float]
    ey: list[float]
    lengths: list[float]
    headings: list[Optional[Angle]]
    partners: list[Optional[Gluing]]
    maps: list[Optional[tuple[float, float, float, float, float, float]]]
    tags: list[str]


def _wedge_contains(data: _CellData, k: int, u: FloatPoint, tol: float = 1e-12) -> bool:
    """True when direction u leaves vertex k into the cell."""
    n = len(data.xs)
    out_angle = math.atan2(data.ey[k], data.ex[k])
    back = (k - 1) % n
    in_angle = math.atan2(-data.ey[back], -data.ex[back])
    span = (in_angle - out_angle) % (2 * math.pi)
    if span == 0.0:
        span = 2 * math.pi
    offset = (math.atan2(u[1], u[0]) - out_angle) % (2 * math.pi)
    return offset <= span + tol or offset >= 2 * math.pi - tol


def _reflect_heading(heading: Optional[Angle], axis: Optional[Angle]) -> Optional[Angle]:
    if heading is None or axis is None or not heading.is_exact or not axis.is_exact:
        return None
    return (axis * 2 - heading).normalized()


class Tracer:
    """Ray tracer bound to one surface, with per-cell geometry caches.

    Caches are filled on first use; a Tracer may be shared read-only across
    threads once warm, and each worker process builds its own.
    """

    def __init__(
        self,
        surface: Surface,
        singular_tolerance: Optional[float] = None,
        tolerance: Optional[float] = None,
    ):
        settings = get_settings()
        self.surface = surface
        self.singular_tolerance = (
            singular_tolerance if singular_tolerance is not None else settings.singular_tolerance
        )
        self.tolerance = tolerance if tolerance is not None else settings.geom_tolerance
        self._data: dict[CellId, _CellData] = {}
        self._fans: dict[Corner, CornerFan] = {}

    # Caches

    def cell_data(self, cid: CellId) -> _CellData:
        data = self._data.get(cid)
        if data is not None:
            return data
        cell = self.surface.cell(cid)
        pts = cell.float_vertices()
        n = cell.n
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ex = [xs[(i + 1) % n] - xs[i] for i in range(n)]
        ey = [ys[(i + 1) % n] - ys[i] for i in range(n)]
        partners = [self.surface.partner(EdgeRef(cid, i)) for i in range(n)]
        headings: list[Optional[Angle]] = []
        for i in range(n):
            heading = cell.heading(i)
            headings.append(heading if heading.is_exact else None)
        data = _CellData(
            xs=xs,
            ys=ys,
            ex=ex,
            ey=ey,
            lengths=[math.hypot(ex[i], ey[i]) for i in range(n)],
            headings=headings,
            partners=partners,
            maps=[g.map.float_parts() if g is not None else None for g in partners],
            tags=[self.surface.tag(EdgeRef(cid, i)) for i in range(n)],
        )
        self._data[cid] = data
        return data

    def fan(self, cid: CellId, corner: int) -> CornerFan:
        key = (cid, corner)
        fan = self._fans.get(key)
        if fan is None:
            fan = corner_fan(self.surface, cid, corner, self.tolerance)
            self._fans[key] = fan
        return fan

    # Kernel

    def exit_edge(
        self, data: _CellData, x: float, y: float, vx: float, vy: float
    ) -> tuple[int, float, float]:
        """Edge index, ray parameter t and edge parameter s of the first exit."""
        best_i, best_t, best_s = -1, math.inf, 0.0
        for i in range(len(data.xs)):
            ex, ey = data.ex[i], data.ey[i]
            denom = vx * ey - vy * ex
            if denom <= 1e-15 * data.lengths[i]:
                continue
            wx, wy = data.xs[i] - x, data.ys[i] - y
            t = (wx * ey - wy * ex) / denom
            if t <= _T_EPS or t >= best_t:
                continue
            s = (vy * wx - vx * wy) / denom
            slack = self.tolerance / data.lengths[i]
            if -slack <= s <= 1.0 + slack:
                best_i, best_t, best_s = i, t, min(1.0, max(0.0, s))
        return best_i, best_t, best_s

    def advance(self, state: TangentState) -> TraceEvent:
        """Move ``state`` to the next edge and apply what happens there."""
        vx, vy = state.direction
        norm = math.hypot(vx, vy)
        if norm == 0.0:
            raise DegenerateDirection(f"zero direction in cell {state.cell!r}")
        if abs(norm - 1.0) > 1e-12:
            vx, vy = vx / norm, vy / norm
        data = self.cell_data(state.cell)
        x, y = state.point
        i, t, s = self.exit_edge(data, x, y, vx, vy)
        if i < 0:
            raise EscapedCell(
                f"no exit from cell {state.cell!r} at ({x:.6g}, {y:.6g})",
                cell=state.cell,
                point=state.point,
            )
        length = data.lengths[i]
        hit = (data.xs[i] + s * data.ex[i], data.ys[i] + s * data.ey[i])
        segment = ((x, y), hit)
        time = state.time + t
        if s * length <= self.singular_tolerance:
            return self._corner(state, i, (vx, vy), time, segment)
        if (1.0 - s) * length <= self.singular_tolerance:
            return self._corner(state, (i + 1) % len(data.xs), (vx, vy), time, segment)
        edge = EdgeRef(state.cell, i)
        gluing = data.partners[i]
        if gluing is None:
            if data.tags[i] == WINDOW_TAG:
                after = replace(state, point=hit, time=time)
                return TraceEvent(EventKind.WINDOW_EXIT, after, state.cell, segment, edge, edge)
            nx_, ny_ = -data.ey[i] / length, data.ex[i] / length
            dot = vx * nx_ + vy * ny_
            heading = _reflect_heading(state.heading, data.headings[i])
            if heading is not None:
                direction = heading.unit_vector()
            else:
                direction = (vx - 2 * dot * nx_, vy - 2 * dot * ny_)
            after = TangentState(state.cell, hit, direction, time, heading, state.displacement)
            return TraceEvent(EventKind.REFLECTION, after, state.cell, segment, edge, edge)
        target = gluing.side_b
        tdata = self.cell_data(target.cell)
        j = target.edge
        u = s if gluing.map.reflect else 1.0 - s
        point = (tdata.xs[j] + u * tdata.ex[j], tdata.ys[j] + u * tdata.ey[j])
        heading = gluing.map.act_on_angle(state.heading) if state.heading is not None else None
        if heading is not None and heading.is_exact:
            direction = heading.unit_vector()
        else:
            parts = data.maps[i]
            assert parts is not None
            a, b, c, d, _, _ = parts
            direction = (a * vx + b * vy, c * vx + d * vy)
            heading = None
        after = TangentState(
            target.cell, point, direction, time, heading, state.displacement + gluing.shift
        )
        return TraceEvent(
            EventKind.CROSSING, after, state.cell, segment, edge, target, gluing.shift
        )

    def _corner(
        self,
        state: TangentState,
        k: int,
        v: FloatPoint,
        time: float,
        segment: tuple[FloatPoint, FloatPoint],
    ) -> TraceEvent:
        data = self.cell_data(state.cell)
        vertex = (state.cell, k)
        at = (data.xs[k], data.ys[k])
        segment = (segment[0], at)
        fan = self.fan(state.cell, k)
        if not fan.complete:
            after = replace(state, point=at, time=time)
            return TraceEvent(EventKind.WINDOW_EXIT, after, state.cell, segment, vertex=vertex)
        if fan.kind not in (VertexKind.REGULAR_INTERIOR, VertexKind.REGULAR_BOUNDARY):
            after = replace(state, point=at, time=time)
            return TraceEvent(EventKind.SINGULAR_HIT, after, state.cell, segment, vertex=vertex)
        heading = state.heading
        kind = EventKind.CROSSING
        edge: Optional[EdgeRef] = None
        if fan.kind == VertexKind.REGULAR_BOUNDARY:
            edge = fan.boundary_edges[0]
            owner = fan.corners[0] if edge.cell == fan.corners[0].cell else fan.corners[-1]
            edata = self.cell_data(edge.cell)
            dx, dy = owner.to_start.linear_apply((edata.ex[edge.edge], edata.ey[edge.edge]))
            norm = math.hypot(dx, dy)
            dx, dy = dx / norm, dy / norm
            dot = v[0] * dx + v[1] * dy
            v = (2 * dot * dx - v[0], 2 * dot * dy - v[1])
            axis = edata.headings[edge.edge]
            axis = owner.to_start.act_on_angle(axis) if axis is not None else None
            heading = _reflect_heading(heading, axis)
            kind = EventKind.REFLECTION
        for corner in fan.corners:
            back = corner.to_start.inverse()
            u = back.linear_apply(v)
            cdata = self.cell_data(corner.cell)
            if _wedge_contains(cdata, corner.corner, (float(u[0]), float(u[1]))):
                new_heading = back.act_on_angle(heading) if heading is not None else None
                if new_heading is not None and not new_heading.is_exact:
                    new_heading = None
                direction = (
                    new_heading.unit_vector() if new_heading else (float(u[0]), float(u[1]))
                )
                point = (cdata.xs[corner.corner], cdata.ys[corner.corner])
                after = TangentState(
                    corner.cell,
                    point,
                    direction,
                    time,
                    new_heading,
                    state.displacement + corner.shift,
                )
                if edge is None:
                    # no edge is crossed, so section edges ending here are not landed on
                    logger.debug("passing through regular vertex %s of %r", k, state.cell)
                return TraceEvent(
                    kind,
                    after,
                    state.cell,
                    segment,
                    edge=edge,
                    target=edge,
                    shift=corner.shift,
                    vertex=vertex,
                )
        after = replace(state, point=at, time=time)
        return TraceEvent(EventKind.SINGULAR_HIT, after, state.cell, segment, vertex=vertex)

    # Drivers

    def iter_events(
        self,
        state: TangentState,
        max_events: Optional[int] = None,
        max_length: Optional[float] = None,
    ) -> Iterator[TraceEvent]:
        """Yield events until a budget runs out, a singular vertex or the window edge."""
        settings = get_settings()
        max_events = max_events if max_events is not None else settings.max_events
        max_length = max_length if max_length is not None else settings.max_length
        limit = state.time + max_length
        for _ in range(max_events):
            event = self.advance(state)
            if event.state.time > limit:
                yield self._truncate(state, limit)
                return
            yield event
            if event.kind in (EventKind.SINGULAR_HIT, EventKind.WINDOW_EXIT):
                return
            state = event.state
        yield TraceEvent(EventKind.TIMEOUT, state, state.cell, (state.point, state.point))

    def _truncate(self, state: TangentState, limit: float) -> TraceEvent:
        remaining = limit - state.time
        x, y = state.point
        vx, vy = state.direction
        end = (x + remaining * vx, y + remaining * vy)
        after = replace(state, point=end, time=limit)
        return TraceEvent(EventKind.TIMEOUT, after, state.cell, ((x, y), end))

    def trace(
        self,
        state: TangentState,
        max_events: Optional[int] = None,
        max_length: Optional[float] = None,
    ) -> list[TraceEvent]:
        return list(self.iter_events(state, max_events, max_length))

    def travel(self, state: TangentState, distance: float) -> TangentState:
        """The state reached after flowing for exactly ``distance``."""
        last = state
        for event in self.iter_events(state, max_length=distance):
            if event.kind == EventKind.SINGULAR_HIT:
                raise SingularHitError("trajectory hit a singular vertex", event=event)
            if event.kind == EventKind.WINDOW_EXIT:
                raise FlowError("trajectory left the instantiated window")
            last = event.state
        return last


def _tracer(target: Union[Surface, Tracer]) -> Tracer:
    return target if isinstance(target, Tracer) else Tracer(target)


def advance(target: Union[Surface, Tracer], state: TangentState) -> TraceEvent:
    return _tracer(target).advance(state)


def trace(
    target: Union[Surface, Tracer],
    state: TangentState,
    max_events: Optional[int] = None,
    max_length: Optional[float] = None,
) -> list[TraceEvent]:
    """Trace ``state`` until a budget runs out or the trajectory terminates.

    Args:
        target: Surface or a Tracer bound to one
        state: Initial tangent state
        max_events: Event budget; defaults to settings
        max_length: Arclength budget; defaults to settings

    Returns:
        The events in order; the last one is a TIMEOUT, SINGULAR_HIT or WINDOW_EXIT
        event unless the budget ended exactly on an edge
    """
    return _tracer(target).trace(state, max_events, max_length)


# Directional decomposition


@dataclass(frozen=True)
class DirectionalOrbit:
    angles: tuple[Angle, ...]
    isotropy: tuple[Isometry, ...]  # group elements fixing the initial direction

    @property
    def singular(self) -> bool:
        return len(self.isotropy) > 1

    def contains(self, angle: Angle, tol: float = 1e-9) -> bool:
        return any(a.isclose(angle, tol) for a in self.angles)


def directional_orbit(
    direction: Angle, group: RotationalGroup, tol: float = 1e-9
) -> DirectionalOrbit:
    """The finite orbit of theta under the holonomy group, with the isotropy of theta.

    A direction with nontrivial isotropy is singular: the directional flow
    double covers part of its phase space.
    """
    if not group.is_finite:
        raise InfiniteGroup("directional orbits need a finite rotational holonomy group")
    direction = direction.normalized()
    angles: list[Angle] = []
    isotropy: list[Isometry] = []
    for g in group.elements:
        image = g.act_on_angle(direction)
        if image.isclose(direction, tol):
            isotropy.append(g)
        if not any(image.isclose(a, tol) for a in angles):
            angles.append(image)
    angles.sort(key=lambda a: a.sort_key())
    return DirectionalOrbit(tuple(angles), tuple(isotropy))


# Cross sections


@dataclass(frozen=True)
class Section:
    """A set of edges transversal to the flow.

    A trajectory meets the section when it reflects off a section edge or
    crosses a gluing onto one.
    """

    edges: frozenset[EdgeRef]
    kind: str = "edges"

    @classmethod
    def boundary(cls, surface: Surface) -> Section:
        edges = [e for e in surface.boundary_edges() if surface.tag(e) != WINDOW_TAG]
        if not edges:
            raise FlowError(f"{surface.name or 'surface'} has no boundary to use as a section")
        return cls(frozenset(edges), "boundary")

    @classmethod
    def period(cls, surface: Surface) -> Section:
        edges = set()
        for gluing in surface.gluings():
            if gluing.shift != 0:
                edges.update((gluing.side_a, gluing.side_b))
        if not edges:
            raise NotPeriodic(f"{surface.name or 'surface'} has no shift-labeled gluings")
        return cls(frozenset(edges), "period")

    @classmethod
    def of(cls, surface: Surface, spec: Union[str, Section, Iterable[EdgeRef], None]) -> Section:
        """Resolve "boundary", "period", an edge collection, or None (boundary when present)."""
        if isinstance(spec, Section):
            return spec
        if spec is None:
            has_boundary = any(surface.tag(e) != WINDOW_TAG for e in surface.boundary_edges())
            return cls.boundary(surface) if has_boundary else cls.period(surface)
        if spec == "boundary":
            return cls.boundary(surface)
        if spec == "period":
            return cls.period(surface)
        if isinstance(spec, str):
            raise FlowError(f"unknown section {spec!r}")
        edges = frozenset(spec)
        if not edges:
            raise FlowError("empty section")
        return cls(edges, "edges")

    def __contains__(self, edge: object) -> bool:
        return edge in self.edges


@dataclass(frozen=True)
class CrossSectionPoint:
    """A unit vector footed on a section edge, pointing into its cell."""

    edge: EdgeRef
    arclength: float  # from the start vertex of the edge
    direction: Angle  # in the chart of the edge's cell
    displacement: int = 0

    def to_state(self, tracer: Tracer) -> TangentState:
        data = tracer.cell_data(self.edge.cell)
        i = self.edge.edge
        length = data.lengths[i]
        tol = tracer.tolerance
        if not -tol <= self.arclength <= length + tol:
            raise OffSection(
                f"arclength {self.arclength} outside edge {self.edge} of length {length}"
            )
        u = self.arclength / length
        point = (data.xs[i] + u * data.ex[i], data.ys[i] + u * data.ey[i])
        vx, vy = self.direction.unit_vector()
        if data.ex[i] * vy - data.ey[i] * vx <= tol * length:
            raise OffSection(
                f"direction {self.direction} does not point into the surface at {self.edge}"
            )
        return TangentState(
            self.edge.cell,
            point,
            (vx, vy),
            0.0,
            self.direction.normalized() if self.direction.is_exact else None,
            self.displacement,
        )

    @classmethod
    def from_state(cls, tracer: Tracer, state: TangentState, edge: EdgeRef) -> CrossSectionPoint:
        data = tracer.cell_data(edge.cell)
        x, y = state.point
        arclength = math.hypot(x - data.xs[edge.edge], y - data.ys[edge.edge])
        return cls(edge, min(arclength, data.lengths[edge.edge]), state.angle(), state.displacement)


@dataclass(frozen=True)
class SectionHit:
    point: CrossSectionPoint
    flight_time: float
    events: int


def section_return(
    target: Union[Surface, Tracer],
    point: CrossSectionPoint,
    section: Union[str, Section, Iterable[EdgeRef], None] = None,
    max_events: Optional[int] = None,
    max_length: Optional[float] = None,
) -> SectionHit:
    """Flow from a section point to the next section point.

    Raises:
        NoReturn: The budget ran out, or the trajectory left the window
        SingularHitError: The trajectory ran into a singular vertex
    """
    tracer = _tracer(target)
    section = Section.of(tracer.surface, section)
    state = point.to_state(tracer)
    count = 0
    for event in tracer.iter_events(state, max_events, max_length):
        count += 1
        if event.kind == EventKind.SINGULAR_HIT:
            raise SingularHitError("trajectory hit a singular vertex", event=event)
        if event.kind == EventKind.TIMEOUT:
            raise NoReturn(f"no return to the section within {count} events", event=event)
        if event.kind == EventKind.WINDOW_EXIT:
            raise NoReturn("trajectory left the instantiated window", event=event)
        landing = event.target
        if landing is not None and landing in section:
            hit = CrossSectionPoint.from_state(tracer, event.state, landing)
            return SectionHit(hit, event.state.time, count)
    raise NoReturn("no return to the section")


def billiard_map(
    point: CrossSectionPoint,
    target: Union[Surface, Tracer],
    section: Union[str, Section, Iterable[EdgeRef], None] = "boundary",
    max_events: Optional[int] = None,
    max_length: Optional[float] = None,
) -> CrossSectionPoint:
    """The first-return map of the section (by default the boundary).

    Raises:
        OffSection: ``point`` is not a valid start; its arclength is off the
            edge, or its direction is parallel to the edge or points out
        NoReturn: A valid start whose orbit does not come back within the
            budget or the window
        SingularHitError: The orbit ran into a singular vertex
    """
    return section_return(target, point, section, max_events, max_length).point


# Section measure


@dataclass(frozen=True)
class InwardPair:
    """A section edge with one orbit direction pointing into its cell."""

    edge: EdgeRef
    direction: Angle  # in the edge's chart
    length: float
    sine: float  # |sin(direction - edge heading)|

    @property
    def weight(self) -> float:
        return self.length * self.sine


def chart_orbits(surface: Surface, orbit: DirectionalOrbit) -> dict[CellId, list[Angle]]:
    """Orbit directions expressed in the chart of every cell."""
    frames = developing_frames(surface)
    result = {}
    for cid, chart in frames.charts.items():
        back = chart.inverse()
        result[cid] = [back.act_on_angle(a) for a in orbit.angles]
    return result


def inward_pairs(
    surface: Surface,
    orbit: DirectionalOrbit,
    section: Union[str, Section, Iterable[EdgeRef], None] = None,
) -> list[InwardPair]:
    section = Section.of(surface, section)
    charts = chart_orbits(surface, orbit)
    pairs = []
    for edge in sorted(section.edges, key=lambda e: (sort_key(e.cell), e.edge)):
        cell = surface.cell(edge.cell)
        heading = cell.heading(edge.edge)
        for angle in charts[edge.cell]:
            sine = (angle - heading).sin()
            if sine > 1e-12:
                pairs.append(InwardPair(edge, angle, cell.edge_length(edge.edge), sine))
    return pairs


def sample_section(
    rng: np.random.Generator,
    pairs: list[InwardPair],
    count: int,
) -> list[CrossSectionPoint]:
    """Draw points from the sine-weighted section measure."""
    if not pairs:
        raise FlowError("no section edge is transversal to the orbit directions")
    weights = np.array([p.weight for p in pairs], dtype=float)
    cumulative = np.cumsum(weights / weights.sum())
    picks = np.searchsorted(cumulative, rng.random(count), side="right")
    positions = rng.random(count)
    points = []
    for index, u in zip(picks, positions):
        pair = pairs[min(int(index), len(pairs) - 1)]
        points.append(CrossSectionPoint(pair.edge, float(u) * pair.length, pair.direction))
    return points


def _exact_sqrt(value: Number) -> Optional[Fraction]:
    if isinstance(value, float):
        return None
    value = Fraction(value)
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


@dataclass(frozen=True)
class MeasureEstimate:
    value: Number
    stderr: float
    exact: bool
    samples: int = 0


def transversality_measure(
    direction: Angle,
    surface: Surface,
    method: str = "exact",
    samples: int = 10_000,
    horizon: float = 10.0,
    seed: Optional[int] = None,
    group: Optional[RotationalGroup] = None,
) -> MeasureEstimate:
    """Flow-invariant mass of boundary-visiting vectors in direction theta.

    The exact value is the mean over the directional orbit of
    1/2 * sum over boundary edges of |e| |sin(theta' - heading(e))|, kept as
    a Fraction when every length and sine is rational. The Monte Carlo mode
    counts boundary hits of area-uniform phase points over ``horizon`` and
    rescales the hit rate by the area.
    """
    group = group if group is not None else rotational_holonomy(surface)
    orbit = directional_orbit(direction, group)
    if method == "exact":
        return _exact_measure(surface, orbit)
    if method in ("mc", "monte-carlo"):
        return _monte_carlo_measure(surface, orbit, samples, horizon, seed)
    raise ValueError(f"unknown method {method!r}")


def _exact_measure(surface: Surface, orbit: DirectionalOrbit) -> MeasureEstimate:
    charts = chart_orbits(surface, orbit)
    exact_total: Optional[Fraction] = Fraction(0)
    float_total = 0.0
    for edge in surface.boundary_edges():
        if surface.tag(edge) == WINDOW_TAG:
            continue
        cell = surface.cell(edge.cell)
        heading = cell.heading(edge.edge)
        length = _exact_sqrt(cell.edge_length2(edge.edge))
        for angle in charts[edge.cell]:
            delta = angle - heading
            sine = delta.exact_sin()
            float_total += cell.edge_length(edge.edge) * abs(delta.sin()) / 2
            if exact_total is not None and sine is not None and length is not None:
                exact_total += length * abs(sine) / 2
            else:
                exact_total = None
    count = len(orbit.angles)
    if exact_total is not None:
        return MeasureEstimate(exact_total / count, 0.0, True)
    return MeasureEstimate(float_total / count, 0.0, False)


def sample_area(
    rng: np.random.Generator, surface: Surface, count: int
) -> list[tuple[CellId, FloatPoint]]:
    """Area-uniform points of a finite surface."""
    ids = surface.cell_ids()
    areas = np.array([float(surface.cell(c).area()) for c in ids])
    picks = rng.choice(len(ids), size=count, p=areas / areas.sum())
    points = []
    for index in picks:
        cell = surface.cell(ids[int(index)])
        xmin, xmax, ymin, ymax = cell.bounding_box()
        while True:
            p = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
            if cell.contains(p, tol=0.0):
                points.append((cell.id, p))
                break
    return points


def _monte_carlo_measure(
    surface: Surface,
    orbit: DirectionalOrbit,
    samples: int,
    horizon: float,
    seed: Optional[int],
) -> MeasureEstimate:
    seed = seed if seed is not None else get_settings().seed
    rng = np.random.default_rng(seed)
    tracer = Tracer(surface)
    charts = chart_orbits(surface, orbit)
    points = sample_area(rng, surface, samples)
    choices = rng.integers(0, len(orbit.angles), size=samples)
    counts = np.zeros(samples)
    for index, ((cid, p), k) in enumerate(zip(points, choices)):
        state = TangentState.start(cid, p, charts[cid][int(k)])
        hits = 0
        for event in tracer.iter_events(state, max_length=horizon):
            if event.kind == EventKind.REFLECTION:
                hits += 1
        counts[index] = hits
    area = surface.area()
    scale = area / horizon
    mean = float(counts.mean()) * scale
    stderr = float(counts.std(ddof=1)) / math.sqrt(samples) * scale if samples > 1 else math.inf
    return MeasureEstimate(mean, stderr, False, samples)


# Beam partition of a section


@dataclass(frozen=True)
class SectionPiece:
    """An interval of a section edge on which the return is combinatorially constant."""

    edge: EdgeRef
    direction: Angle
    start: float
    end: float
    phi: int
    landing: EdgeRef

    @property
    def width(self) -> float:
        return self.end - self.start


@dataclass
class _Beam:
    cell: CellId
    a: FloatPoint
    b: FloatPoint
    sa: float
    sb: float
    v: FloatPoint
    heading: Optional[Angle]
    phi: int
    depth: int = 0
    history: list[int] = field(default_factory=list)


def _line_hit(data: _CellData, i: int, p: FloatPoint, v: FloatPoint) -> float:
    """Edge parameter where the ray p + t v meets the line of edge i."""
    ex, ey = data.ex[i], data.ey[i]
    denom = v[0] * ey - v[1] * ex
    wx, wy = data.xs[i] - p[0], data.ys[i] - p[1]
    return (v[1] * wx - v[0] * wy) / denom


def section_partition(
    target: Union[Surface, Tracer],
    edge: EdgeRef,
    direction: Angle,
    section: Union[str, Section, Iterable[EdgeRef], None] = None,
    max_pieces: Optional[int] = None,
    max_depth: int = 10_000,
) -> list[SectionPiece]:
    """Split a section edge into intervals of constant return combinatorics.

    A beam of parallel rays leaves the whole edge; in every cell it is cut at
    the shadows of the cell's vertices, so each sub-beam leaves through a
    single edge. Sub-beams are transported until they land on the section.

    Raises:
        NoReturn: The partition needed more than ``max_pieces`` beams, or a
            beam did not land within ``max_depth`` cells
    """
    tracer = _tracer(target)
    section = Section.of(tracer.surface, section)
    max_pieces = max_pieces if max_pieces is not None else get_settings().beam_max_pieces
    data = tracer.cell_data(edge.cell)
    i = edge.edge
    length = data.lengths[i]
    vx, vy = direction.unit_vector()
    if data.ex[i] * vy - data.ey[i] * vx <= 0:
        raise OffSection(f"direction {direction} does not point into the surface at {edge}")
    start = (data.xs[i], data.ys[i])
    end = (data.xs[i] + data.ex[i], data.ys[i] + data.ey[i])
    heading = direction.normalized() if direction.is_exact else None
    stack = [_Beam(edge.cell, start, end, 0.0, length, (vx, vy), heading, 0, history=[i])]
    pieces: list[SectionPiece] = []
    processed = 0
    while stack:
        beam = stack.pop()
        processed += 1
        if processed > max_pieces:
            raise NoReturn(f"section partition of {edge} exceeded {max_pieces} beams")
        if beam.depth > max_depth:
            raise NoReturn(f"beam from {edge} did not land within {max_depth} cells")
        cdata = tracer.cell_data(beam.cell)
        ax, ay = beam.a
        bx, by = beam.b
        wx, wy = bx - ax, by - ay
        cross_wv = wx * beam.v[1] - wy * beam.v[0]
        if abs(cross_wv) < 1e-300:
            continue
        cuts = [0.0, 1.0]
        for k in range(len(cdata.xs)):
            px, py = cdata.xs[k] - ax, cdata.ys[k] - ay
            u = (px * beam.v[1] - py * beam.v[0]) / cross_wv
            t = (wx * py - wy * px) / cross_wv
            if 1e-12 < u < 1.0 - 1e-12 and t > 1e-12:
                cuts.append(u)
        cuts.sort()
        for u0, u1 in zip(cuts, cuts[1:]):
            if u1 - u0 <= 1e-13:
                continue
            um = (u0 + u1) / 2
            mid = (ax + um * wx, ay + um * wy)
            j, _, _ = tracer.exit_edge(cdata, mid[0], mid[1], beam.v[0], beam.v[1])
            if j < 0:
                raise NoReturn(f"beam lost in cell {beam.cell!r}")
            p0 = (ax + u0 * wx, ay + u0 * wy)
            p1 = (ax + u1 * wx, ay + u1 * wy)
            s0 = min(1.0, max(0.0, _line_hit(cdata, j, p0, beam.v)))
            s1 = min(1.0, max(0.0, _line_hit(cdata, j, p1, beam.v)))
            sa = beam.sa + u0 * (beam.sb - beam.sa)
            sb = beam.sa + u1 * (beam.sb - beam.sa)
            exit_ref = EdgeRef(beam.cell, j)
            gluing = cdata.partners[j]
            landing = exit_ref if gluing is None else gluing.side_b
            shift = 0 if gluing is None else gluing.shift
            if landing in section:
                pieces.append(
                    SectionPiece(
                        edge, direction, min(sa, sb), max(sa, sb), beam.phi + shift, landing
                    )
                )
                continue
            q0 = (cdata.xs[j] + s0 * cdata.ex[j], cdata.ys[j] + s0 * cdata.ey[j])
            q1 = (cdata.xs[j] + s1 * cdata.ex[j], cdata.ys[j] + s1 * cdata.ey[j])
            if gluing is None:
                if cdata.tags[j] == WINDOW_TAG:
                    raise NoReturn("beam left the instantiated window")
                length_j = cdata.lengths[j]
                nx_, ny_ = -cdata.ey[j] / length_j, cdata.ex[j] / length_j
                dot = beam.v[0] * nx_ + beam.v[1] * ny_
                v = (beam.v[0] - 2 * dot * nx_, beam.v[1] - 2 * dot * ny_)
                new_heading = _reflect_heading(beam.heading, cdata.headings[j])
                stack.append(
                    _Beam(beam.cell, q0, q1, sa, sb, v, new_heading, beam.phi, beam.depth + 1)
                )
                continue
            tdata = tracer.cell_data(gluing.side_b.cell)
            m = gluing.side_b.edge
            r0, r1 = (s0, s1) if gluing.map.reflect else (1.0 - s0, 1.0 - s1)
            t0 = (tdata.xs[m] + r0 * tdata.ex[m], tdata.ys[m] + r0 * tdata.ey[m])
            t1 = (tdata.xs[m] + r1 * tdata.ex[m], tdata.ys[m] + r1 * tdata.ey[m])
            parts = cdata.maps[j]
            assert parts is not None
            a, b, c, d, _, _ = parts
            v = (a * beam.v[0] + b * beam.v[1], c * beam.v[0] + d * beam.v[1])
            new_heading = gluing.map.act_on_angle(beam.heading) if beam.heading else None
            stack.append(
                _Beam(
                    gluing.side_b.cell,
                    t0,
                    t1,
                    sa,
                    sb,
                    v,
                    new_heading,
                    beam.phi + gluing.shift,
                    beam.depth + 1,
                )
            )
    return _merge_pieces(pieces)


def _merge_pieces(pieces: list[SectionPiece]) -> list[SectionPiece]:
    pieces = sorted(pieces, key=lambda p: p.start)
    merged: list[SectionPiece] = []
    for piece in pieces:
        last = merged[-1] if merged else None
        if (
            last is not None
            and last.phi == piece.phi
            and last.landing == piece.landing
            and abs(last.end - piece.start) <= 1e-12
        ):
            merged[-1] = replace(last, end=piece.end)
        else:
            merged.append(piece)
    return merged
