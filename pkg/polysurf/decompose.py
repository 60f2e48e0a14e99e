"""Vertical-slab decomposition of a box minus obstacles and slit barriers."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

from .angles import Angle, Number, is_exact_number
from .errors import BarrierCollision, ParamOutOfRange
from .geometry import Cell, CellId, EdgeRef, Gluing, Point
from .isometry import Isometry

logger = logging.getLogger(__name__)

_TOL = 1e-12

BOTTOM = "bottom"
TOP = "top"


@dataclass(frozen=True)
class Segment:
    """A straight piece of obstacle boundary or a slit barrier."""

    start: Point
    end: Point
    heading: Optional[Angle] = None  # direction start -> end, when exact
    tag: str = "barrier"


@dataclass(frozen=True)
class Obstacle:
    """A simple polygon removed from the box, vertices counterclockwise."""

    vertices: tuple[Point, ...]
    headings: Optional[tuple[Angle, ...]] = None
    tag: str = "obstacle"

    def segments(self) -> list[Segment]:
        n = len(self.vertices)
        return [
            Segment(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.headings[i] if self.headings is not None else None,
                self.tag,
            )
            for i in range(n)
        ]

    def contains(self, x: float, y: float) -> bool:
        inside = False
        pts = [(float(px), float(py)) for px, py in self.vertices]
        for i in range(len(pts)):
            (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % len(pts)]
            if (y0 > y) != (y1 > y):
                if x < x0 + (y - y0) * (x1 - x0) / (y1 - y0):
                    inside = not inside
        return inside


@dataclass
class Decomposition:
    """Cells of a decomposed box with the pieces of its four sides.

    ``left`` and ``right`` run bottom to top; ``bottom`` and ``top`` run left
    to right. Side pieces are neither glued nor tagged.
    """

    cells: list[Cell]
    gluings: list[Gluing]
    tags: dict[EdgeRef, str]
    left: list[EdgeRef] = field(default_factory=list)
    right: list[EdgeRef] = field(default_factory=list)
    bottom: list[EdgeRef] = field(default_factory=list)
    top: list[EdgeRef] = field(default_factory=list)

    def cell_map(self) -> dict[CellId, Cell]:
        return {c.id: c for c in self.cells}


@dataclass(frozen=True)
class _Piece:
    """A segment oriented left to right."""

    xl: Number
    yl: Number
    xr: Number
    yr: Number
    heading: Angle
    tag: str

    def y_at(self, x: Number) -> Number:
        if _same(x, self.xl):
            return self.yl
        if _same(x, self.xr):
            return self.yr
        return self.yl + (self.yr - self.yl) * (x - self.xl) / (self.xr - self.xl)


def _same(a: Number, b: Number) -> bool:
    if is_exact_number(a) and is_exact_number(b):
        return a == b
    return abs(float(a) - float(b)) <= _TOL


def _unique(values: Sequence[Number]) -> list[Number]:
    """Sorted values with near-equal floats merged, exact values preferred."""
    ordered = sorted(values, key=lambda v: (float(v), not is_exact_number(v)))
    result: list[Number] = []
    for v in ordered:
        if result and _same(result[-1], v):
            continue
        result.append(v)
    return result


def _key(value: Number) -> float:
    return round(float(value), 9)


def _dedupe(vertices: list[Point], headings: list[Angle]) -> tuple[list[Point], list[Angle]]:
    """Drop an edge whose endpoints coincide, keeping the heading of the next edge."""
    points, kept = [], []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        if _same(p[0], q[0]) and _same(p[1], q[1]):
            continue
        points.append(p)
        kept.append(headings[i])
    return points, kept


def _orient(segment: Segment) -> Optional[_Piece]:
    (x0, y0), (x1, y1) = segment.start, segment.end
    heading = segment.heading or Angle.from_vector(x1 - x0, y1 - y0)
    if _same(x0, x1):
        return None
    if float(x0) > float(x1):
        return _Piece(x1, y1, x0, y0, (heading + Angle.exact(1)).normalized(), segment.tag)
    return _Piece(x0, y0, x1, y1, heading.normalized(), segment.tag)


def decompose_box(
    box: tuple[Number, Number, Number, Number],
    obstacles: Sequence[Obstacle] = (),
    barriers: Sequence[Segment] = (),
    prefix: str = "c",
) -> Decomposition:
    """Cut a box minus obstacles and barriers into vertical trapezoids.

    Slabs are bounded by the x-coordinates of all obstacle vertices and
    barrier endpoints. Vertical sides are split at every point where a
    neighboring slab has a corner, so adjacent cells share full sides.

    Args:
        box: (xmin, xmax, ymin, ymax)
        obstacles: Polygons strictly inside the box
        barriers: Slits strictly inside the box
        prefix: Prefix of the generated cell ids

    Returns:
        The Decomposition
    """
    x0, x1, y0, y1 = box
    for obstacle in obstacles:
        for x, y in obstacle.vertices:
            if not (float(x0) < float(x) < float(x1) and float(y0) < float(y) < float(y1)):
                raise ParamOutOfRange(f"obstacle vertex ({float(x):g}, {float(y):g}) outside box")
    for barrier in barriers:
        for x, y in (barrier.start, barrier.end):
            if not (float(x0) < float(x) < float(x1) and float(y0) < float(y) < float(y1)):
                raise ParamOutOfRange(
                    f"barrier endpoint ({float(x):g}, {float(y):g}) outside box"
                )
        if _same(barrier.start[0], barrier.end[0]) and _same(barrier.start[1], barrier.end[1]):
            raise BarrierCollision("barrier endpoints coincide")

    segments = [
        Segment((x0, y0), (x1, y0), Angle.zero(), BOTTOM),
        Segment((x0, y1), (x1, y1), Angle.zero(), TOP),
    ]
    for obstacle in obstacles:
        segments.extend(obstacle.segments())
    segments.extend(barriers)
    pieces = [p for p in (_orient(s) for s in segments) if p is not None]
    verticals = []
    for s in segments:
        if _same(s.start[0], s.end[0]):
            ylo, yhi = sorted((s.start[1], s.end[1]), key=float)
            verticals.append((s.start[0], ylo, yhi, s.tag))

    ends = [x for p in pieces for x in (p.xl, p.xr)]
    xs = _unique([x0, x1, *ends, *(v[0] for v in verticals)])
    breaks: dict[float, list[Number]] = {}
    for x in xs:
        ys = [p.y_at(x) for p in pieces if float(p.xl) - _TOL <= float(x) <= float(p.xr) + _TOL]
        for vx, ylo, yhi, _ in verticals:
            if _same(vx, x):
                ys.extend((ylo, yhi))
        breaks[_key(x)] = _unique(ys)
    sides = _unique([*breaks[_key(x0)], *breaks[_key(x1)]])
    breaks[_key(x0)] = breaks[_key(x1)] = sides

    cells: list[Cell] = []
    tags: dict[EdgeRef, str] = {}
    result = Decomposition(cells, [], tags)
    # vertical pieces keyed by (x, ylo, yhi): edges of the cell on each side
    right_sides: dict[tuple[float, float, float], EdgeRef] = {}
    left_sides: dict[tuple[float, float, float], EdgeRef] = {}
    bottoms: list[tuple[float, EdgeRef]] = []
    tops: list[tuple[float, EdgeRef]] = []
    half, three_halves, pi = Angle.exact(1, 2), Angle.exact(3, 2), Angle.exact(1)

    for slab, (xa, xb) in enumerate(zip(xs, xs[1:])):
        xm = (float(xa) + float(xb)) / 2
        active = [
            p
            for p in pieces
            if float(p.xl) <= float(xa) + _TOL and float(p.xr) >= float(xb) - _TOL
        ]
        active.sort(key=lambda p: float(p.y_at(xm)))
        count = 0
        for lo, hi in zip(active, active[1:]):
            ylo_m, yhi_m = float(lo.y_at(xm)), float(hi.y_at(xm))
            if yhi_m - ylo_m <= _TOL:
                continue
            if any(o.contains(xm, (ylo_m + yhi_m) / 2) for o in obstacles):
                continue
            cid = f"{prefix}{slab}_{count}"
            count += 1
            ya_lo, yb_lo, yb_hi, ya_hi = lo.y_at(xa), lo.y_at(xb), hi.y_at(xb), hi.y_at(xa)
            vertices: list[Point] = [(xa, ya_lo), (xb, yb_lo)]
            headings: list[Angle] = [lo.heading]
            kinds = ["bottom"]
            right_ys = _between(breaks[_key(xb)], yb_lo, yb_hi)
            for y in [*right_ys, yb_hi]:
                vertices.append((xb, y))
                headings.append(half)
                kinds.append("right")
            vertices.append((xa, ya_hi))
            headings.append((hi.heading + pi).normalized())
            kinds.append("top")
            left_ys = _between(breaks[_key(xa)], ya_lo, ya_hi)
            for y in [*reversed(left_ys), ya_lo]:
                vertices.append((xa, y))
                headings.append(three_halves)
                kinds.append("left")
            # the last vertex repeats the first; edges are vertex i -> i+1
            vertices.pop()
            points, kept = _dedupe(vertices, headings)
            kept_kinds = [
                kinds[i]
                for i in range(len(vertices))
                if not (
                    _same(vertices[i][0], vertices[(i + 1) % len(vertices)][0])
                    and _same(vertices[i][1], vertices[(i + 1) % len(vertices)][1])
                )
            ]
            cell = Cell(cid, tuple(points), tuple(kept))
            cells.append(cell)
            for i, kind in enumerate(kept_kinds):
                ref = EdgeRef(cid, i)
                start, end = cell.edge(i)
                if kind == "bottom":
                    if lo.tag == BOTTOM:
                        bottoms.append((float(start[0]), ref))
                    else:
                        tags[ref] = lo.tag
                elif kind == "top":
                    if hi.tag == TOP:
                        tops.append((float(end[0]), ref))
                    else:
                        tags[ref] = hi.tag
                elif kind == "right":
                    right_sides[(_key(xb), _key(start[1]), _key(end[1]))] = ref
                else:
                    left_sides[(_key(xa), _key(end[1]), _key(start[1]))] = ref

    first, last = _key(x0), _key(x1)
    identity = Isometry.identity()
    for key, ref in right_sides.items():
        if key[0] == last:
            continue
        partner = left_sides.get(key)
        tag = _vertical_tag(key, verticals)
        if partner is None or tag == "barrier":
            tags[ref] = tag or "obstacle"
            if partner is not None:
                tags[partner] = tag or "obstacle"
            continue
        result.gluings.append(Gluing(ref, partner, identity))
    for key, ref in left_sides.items():
        if key[0] == first:
            continue
        if key not in right_sides:
            tags[ref] = _vertical_tag(key, verticals) or "obstacle"

    result.left = [r for k, r in sorted(left_sides.items(), key=_by_y) if k[0] == first]
    result.right = [r for k, r in sorted(right_sides.items(), key=_by_y) if k[0] == last]
    result.bottom = [r for _, r in sorted(bottoms, key=lambda t: t[0])]
    result.top = [r for _, r in sorted(tops, key=lambda t: t[0])]
    logger.debug("decomposed box into %d cells", len(cells))
    return result


def _between(values: list[Number], low: Number, high: Number) -> list[Number]:
    return [y for y in values if float(low) + _TOL < float(y) < float(high) - _TOL]


def _by_y(item: tuple[tuple[float, float, float], EdgeRef]) -> float:
    return item[0][1]


def _vertical_tag(
    key: tuple[float, float, float],
    verticals: list[tuple[Number, Number, Number, str]],
) -> Optional[str]:
    x, ylo, yhi = key
    for vx, vlo, vhi, tag in verticals:
        if abs(float(vx) - x) <= 1e-9 and float(vlo) - 1e-9 <= ylo and yhi <= float(vhi) + 1e-9:
            return tag
    return None
