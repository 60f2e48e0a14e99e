"""Polygonal cells, gluings and surfaces assembled from them."""

from __future__ import annotations

import logging
import math
import threading
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, NamedTuple, Optional, Protocol, Union

import networkx as nx
from networkx.utils import UnionFind

from .angles import Angle, Number, is_exact_number
from .config import get_settings
from .errors import (
    BadOrientation,
    Disconnected,
    DuplicateGluing,
    EmptyGlueSet,
    GeometryError,
    InvalidCell,
    LengthMismatch,
    MapMismatch,
    NonOrientable,
    UnknownEdge,
)
from .isometry import Isometry, Vec

logger = logging.getLogger(__name__)

CellId = Union[int, str]
Point = tuple[Number, Number]
Corner = tuple[CellId, int]

WINDOW_TAG = "window"


class EdgeRef(NamedTuple):
    """Edge ``edge`` of cell ``cell``; edge i runs from vertex i to vertex i+1."""

    cell: CellId
    edge: int

    def __str__(self) -> str:
        return f"{self.cell}:{self.edge}"


def sort_key(value: Any) -> tuple[int, str]:
    """Total order on mixed int/str identifiers."""
    if isinstance(value, tuple):
        return (2, "|".join(str(v) for v in value))
    return (0, f"{value:012d}") if isinstance(value, int) and value >= 0 else (1, str(value))


class Window(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @classmethod
    def square(cls, radius: float) -> Window:
        return cls(-radius, radius, -radius, radius)

    @classmethod
    def parse(cls, text: str) -> Window:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError("window is xmin,xmax,ymin,ymax")
        return cls(*parts)

    def meets(self, cell: Cell) -> bool:
        xs = [float(v[0]) for v in cell.vertices]
        ys = [float(v[1]) for v in cell.vertices]
        return not (
            max(xs) < self.xmin or min(xs) > self.xmax or max(ys) < self.ymin or min(ys) > self.ymax
        )


# Cells


def edge_index_after_reflection(n: int, i: int) -> int:
    """Index of edge i once the vertex order of an n-gon is reversed."""
    return (n - 2 - i) % n


def corner_index_after_reflection(n: int, i: int) -> int:
    return (n - 1 - i) % n


@dataclass(frozen=True)
class Cell:
    """A simple counterclockwise polygon in its own chart.

    ``headings`` optionally carries the exact direction angle of every edge.
    Coordinates of a rotated polygon are irrational even when its angles are
    exact, so exactness of corner angles travels with the headings.
    """

    id: CellId
    vertices: tuple[Point, ...]
    headings: Optional[tuple[Angle, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(tuple(v) for v in self.vertices))
        if self.headings is not None:
            object.__setattr__(self, "headings", tuple(self.headings))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def is_exact(self) -> bool:
        return all(is_exact_number(x) and is_exact_number(y) for x, y in self.vertices)

    def edge(self, i: int) -> tuple[Point, Point]:
        return self.vertices[i % self.n], self.vertices[(i + 1) % self.n]

    def edge_vector(self, i: int) -> Vec:
        (x0, y0), (x1, y1) = self.edge(i)
        return (x1 - x0, y1 - y0)

    def edge_length2(self, i: int) -> Number:
        dx, dy = self.edge_vector(i)
        return dx * dx + dy * dy

    def edge_length(self, i: int) -> float:
        return math.sqrt(float(self.edge_length2(i)))

    def heading(self, i: int) -> Angle:
        if self.headings is not None:
            return self.headings[i % self.n]
        return Angle.from_vector(*self.edge_vector(i))

    def corner_angle(self, i: int) -> Angle:
        """Interior angle at vertex i."""
        incoming, outgoing = self.heading(i - 1), self.heading(i)
        turn = outgoing - incoming
        if turn.pi_units is not None:
            t = turn.pi_units % 2
            if t > 1:
                t -= 2
            return Angle(pi_units=1 - t)
        t = turn.to_radians() % (2 * math.pi)
        if t > math.pi:
            t -= 2 * math.pi
        return Angle.radians(math.pi - t)

    def area(self) -> Number:
        total: Number = 0
        for i in range(self.n):
            (x0, y0), (x1, y1) = self.edge(i)
            total += x0 * y1 - x1 * y0
        return total / 2 if isinstance(total, float) else Fraction(total) / 2

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [float(v[0]) for v in self.vertices]
        ys = [float(v[1]) for v in self.vertices]
        return min(xs), max(xs), min(ys), max(ys)

    def float_vertices(self) -> list[tuple[float, float]]:
        return [(float(x), float(y)) for x, y in self.vertices]

    def contains(self, point: tuple[float, float], tol: float = 1e-9) -> bool:
        """Closed containment, with ``tol`` slack around the boundary."""
        px, py = float(point[0]), float(point[1])
        pts = self.float_vertices()
        inside = False
        for i in range(len(pts)):
            (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % len(pts)]
            if _segment_distance(px, py, x0, y0, x1, y1) <= tol:
                return True
            if (y0 > py) != (y1 > py):
                xcross = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
                if px < xcross:
                    inside = not inside
        return inside

    def transformed(self, iso: Isometry, new_id: CellId) -> Cell:
        """Image under ``iso``, reindexed to stay counterclockwise."""
        images = [iso.apply(v) for v in self.vertices]
        headings = [iso.act_on_angle(self.heading(i)) for i in range(self.n)]
        if not iso.reflect:
            return Cell(new_id, tuple(images), tuple(headings))
        n = self.n
        vertices = tuple(images[corner_index_after_reflection(n, k)] for k in range(n))
        new_headings = [Angle.zero()] * n
        for i in range(n):
            flipped = (headings[i] + Angle.exact(1)).normalized()
            new_headings[edge_index_after_reflection(n, i)] = flipped
        return Cell(new_id, vertices, tuple(new_headings))

    def translated(self, dx: Number, dy: Number, new_id: CellId) -> Cell:
        return Cell(new_id, tuple((x + dx, y + dy) for x, y in self.vertices), self.headings)


def _segment_distance(px: float, py: float, x0: float, y0: float, x1: float, y1: float) -> float:
    dx, dy = x1 - x0, y1 - y0
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return math.hypot(px - x0, py - y0)
    t = max(0.0, min(1.0, ((px - x0) * dx + (py - y0) * dy) / length2))
    return math.hypot(px - (x0 + t * dx), py - (y0 + t * dy))


def _segments_cross(
    a: tuple[float, float], b: tuple[float, float], c: tuple[float, float], d: tuple[float, float],
    tol: float,
) -> bool:
    def orient(p: tuple[float, float], q: tuple[float, float], r: tuple[float, float]) -> float:
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > tol and o2 < -tol) or (o1 < -tol and o2 > tol)) and (
        (o3 > tol and o4 < -tol) or (o3 < -tol and o4 > tol)
    ):
        return True
    # touching counts as an intersection for non-adjacent edges
    for p, q, r in ((a, b, c), (a, b, d), (c, d, a), (c, d, b)):
        if _segment_distance(r[0], r[1], p[0], p[1], q[0], q[1]) <= tol:
            return True
    return False


# Gluings


@dataclass(frozen=True)
class Gluing:
    """``map`` carries side_a onto side_b, with the two cells on opposite sides.

    Orientation preserving maps send the start of side_a to the end of
    side_b; reflections send start to start. ``shift`` is the Z-label of
    the crossing from side_a to side_b.
    """

    side_a: EdgeRef
    side_b: EdgeRef
    map: Isometry
    shift: int = 0

    def inverse(self) -> Gluing:
        return Gluing(self.side_b, self.side_a, self.map.inverse(), -self.shift)

    def canonical(self) -> Gluing:
        """The orientation of this gluing with the smaller side first."""
        if (sort_key(self.side_a.cell), self.side_a.edge) <= (
            sort_key(self.side_b.cell),
            self.side_b.edge,
        ):
            return self
        return self.inverse()


# Lazy surfaces


@dataclass(frozen=True)
class Block:
    """Cells produced by a provider for one index, with every gluing touching them."""

    cells: tuple[Cell, ...]
    gluings: tuple[Gluing, ...]
    tags: Mapping[EdgeRef, str] = field(default_factory=dict)


class CellProvider(Protocol):
    """Pure generator of cells for an infinite surface, keyed by integer index."""

    def block(self, index: int) -> Optional[Block]: ...

    def block_of(self, cell: CellId) -> Optional[int]: ...

    def blocks_in(self, window: Window) -> Iterable[int]: ...


# Surfaces


class Surface:
    """A cell complex of polygons glued along full sides.

    Finite surfaces hold all their cells. Lazy surfaces hold a provider and
    instantiate blocks on demand; instantiation is guarded by a lock so a
    surface may be shared between threads.
    """

    def __init__(
        self,
        cells: Iterable[Cell],
        gluings: Iterable[Gluing] = (),
        tags: Optional[Mapping[EdgeRef, str]] = None,
        provider: Optional[CellProvider] = None,
        name: str = "",
        period: Optional[Vec] = None,
        metadata: Optional[dict[str, Any]] = None,
    ):
        self.name = name
        self.period = period
        self.metadata: dict[str, Any] = dict(metadata or {})
        self._provider = provider
        self._cells: dict[CellId, Cell] = {}
        self._partners: dict[EdgeRef, Gluing] = {}
        self._tags: dict[EdgeRef, str] = dict(tags or {})
        self._blocks: set[int] = set()
        self._lock = threading.RLock()
        for cell in cells:
            if cell.id in self._cells:
                raise InvalidCell(f"duplicate cell id {cell.id!r}")
            self._cells[cell.id] = cell
        for gluing in gluings:
            self._add_gluing(gluing)

    def __getstate__(self) -> dict[str, Any]:
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state: dict[str, Any]) -> None:
        self.__dict__.update(state)
        self._lock = threading.RLock()

    def __repr__(self) -> str:
        kind = "lazy" if self.is_lazy else f"{len(self._cells)} cells"
        return f"Surface({self.name or 'unnamed'}, {kind})"

    def _add_gluing(self, gluing: Gluing, replace: bool = False) -> None:
        if gluing.side_a == gluing.side_b:
            raise DuplicateGluing(f"edge {gluing.side_a} glued to itself")
        for side, oriented in ((gluing.side_a, gluing), (gluing.side_b, gluing.inverse())):
            if side in self._partners and not replace:
                raise DuplicateGluing(f"edge {side} appears in more than one gluing")
            self._partners[side] = oriented

    # Lazy instantiation

    @property
    def is_lazy(self) -> bool:
        return self._provider is not None

    @property
    def provider(self) -> Optional[CellProvider]:
        return self._provider

    def load_block(self, index: int) -> bool:
        if self._provider is None:
            return False
        with self._lock:
            if index in self._blocks:
                return True
            block = self._provider.block(index)
            if block is None:
                return False
            for cell in block.cells:
                self._cells.setdefault(cell.id, cell)
            for gluing in block.gluings:
                # neighbor blocks hand out the inverse orientation of shared gluings
                if gluing.side_a not in self._partners:
                    self._partners[gluing.side_a] = gluing
                if gluing.side_b not in self._partners:
                    self._partners[gluing.side_b] = gluing.inverse()
            self._tags.update(block.tags)
            self._blocks.add(index)
            return True

    def instantiate(self, window: Window) -> list[CellId]:
        """Load every block meeting ``window`` and return the cells meeting it."""
        if self._provider is not None:
            for index in self._provider.blocks_in(window):
                self.load_block(index)
        return [cid for cid, cell in list(self._cells.items()) if window.meets(cell)]

    def try_cell(self, cid: CellId) -> Optional[Cell]:
        cell = self._cells.get(cid)
        if cell is not None or self._provider is None:
            return cell
        index = self._provider.block_of(cid)
        if index is None or not self.load_block(index):
            return None
        return self._cells.get(cid)

    def cell(self, cid: CellId) -> Cell:
        cell = self.try_cell(cid)
        if cell is None:
            raise UnknownEdge(f"no cell {cid!r} in surface {self.name or ''}".strip())
        return cell

    # Queries

    @property
    def cells(self) -> Mapping[CellId, Cell]:
        """Instantiated cells."""
        return dict(self._cells)

    def cell_ids(self) -> list[CellId]:
        return sorted(self._cells, key=sort_key)

    def partner(self, edge: EdgeRef) -> Optional[Gluing]:
        """The gluing leaving through ``edge``, oriented from it, or None on the boundary."""
        if edge.cell not in self._cells:
            self.cell(edge.cell)
        return self._partners.get(edge)

    def gluings(self) -> list[Gluing]:
        """One canonical orientation of every instantiated gluing."""
        seen: dict[tuple[EdgeRef, EdgeRef], Gluing] = {}
        for gluing in self._partners.values():
            canonical = gluing.canonical()
            seen.setdefault((canonical.side_a, canonical.side_b), canonical)
        return [seen[k] for k in sorted(seen, key=lambda k: (sort_key(k[0].cell), k[0].edge))]

    def boundary_edges(self) -> list[EdgeRef]:
        edges = []
        for cid in self.cell_ids():
            for i in range(self._cells[cid].n):
                ref = EdgeRef(cid, i)
                if ref not in self._partners:
                    edges.append(ref)
        return edges

    def is_boundary(self, edge: EdgeRef) -> bool:
        return self.partner(edge) is None

    def tag(self, edge: EdgeRef) -> str:
        return self._tags.get(edge, "boundary")

    @property
    def tags(self) -> Mapping[EdgeRef, str]:
        return dict(self._tags)

    @property
    def is_periodic(self) -> bool:
        return any(g.shift != 0 for g in self._partners.values())

    def area(self) -> float:
        return sum(float(c.area()) for c in self._cells.values())

    def restrict(self, window: Window) -> Surface:
        """Finite sub-complex of the cells meeting ``window``.

        Edges glued to cells outside the window become boundary tagged
        ``window``.
        """
        keep = set(self.instantiate(window))
        cells = [self._cells[c] for c in sorted(keep, key=sort_key)]
        gluings = []
        tags = {}
        for cid in keep:
            for i in range(self._cells[cid].n):
                ref = EdgeRef(cid, i)
                gluing = self._partners.get(ref)
                if gluing is None:
                    if ref in self._tags:
                        tags[ref] = self._tags[ref]
                elif gluing.side_b.cell in keep:
                    gluings.append(gluing.canonical())
                else:
                    tags[ref] = WINDOW_TAG
        unique = {(g.side_a, g.side_b): g for g in gluings}
        return Surface(
            cells,
            unique.values(),
            tags,
            name=f"{self.name}[window]",
            period=self.period,
            metadata=self.metadata,
        )

    def signature(self) -> tuple[Any, ...]:
        """Structural fingerprint; equal for identical complexes."""
        cells = tuple(
            (cid, self._cells[cid].vertices, self._cells[cid].headings) for cid in self.cell_ids()
        )
        gluings = tuple(
            (g.side_a, g.side_b, g.map, g.shift) for g in self.gluings()
        )
        tags = tuple(sorted(((str(e), t) for e, t in self._tags.items())))
        return (cells, gluings, tags, self.period)


# Validation


def _check_cell(cell: Cell, tol: float) -> None:
    if cell.n < 3:
        raise InvalidCell(f"cell {cell.id!r} has fewer than 3 vertices")
    if cell.headings is not None and len(cell.headings) != cell.n:
        raise InvalidCell(f"cell {cell.id!r}: {len(cell.headings)} headings for {cell.n} edges")
    for i in range(cell.n):
        if cell.edge_length(i) <= tol:
            raise InvalidCell(f"cell {cell.id!r}: repeated vertex {i}")
    if float(cell.area()) <= 0:
        raise InvalidCell(f"cell {cell.id!r} is not counterclockwise")
    pts = cell.float_vertices()
    n = cell.n
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], tol):
                raise InvalidCell(f"cell {cell.id!r} is not simple (edges {i} and {j})")
    if cell.headings is not None:
        for i in range(n):
            dx, dy = cell.edge_vector(i)
            length = cell.edge_length(i)
            hx, hy = cell.heading(i).unit_vector()
            cross = hx * float(dy) - hy * float(dx)
            dot = hx * float(dx) + hy * float(dy)
            if abs(cross) > 1e3 * tol * max(1.0, length) or dot <= 0:
                raise InvalidCell(f"cell {cell.id!r}: heading {i} disagrees with coordinates")
    for i in range(n):
        angle = cell.corner_angle(i)
        if angle.to_radians() <= tol:
            raise InvalidCell(f"cell {cell.id!r}: zero angle at vertex {i}")


def _points_match(p: Point, q: Point, tol: float) -> bool:
    if all(is_exact_number(v) for v in (*p, *q)):
        return p[0] == q[0] and p[1] == q[1]
    return math.hypot(float(p[0]) - float(q[0]), float(p[1]) - float(q[1])) <= tol


def _check_gluing(surface: Surface, gluing: Gluing, tol: float) -> None:
    cell_a = surface.try_cell(gluing.side_a.cell)
    cell_b = surface.try_cell(gluing.side_b.cell)
    for side, cell in ((gluing.side_a, cell_a), (gluing.side_b, cell_b)):
        if cell is None:
            raise UnknownEdge(f"gluing references missing cell {side.cell!r}")
        if not 0 <= side.edge < cell.n:
            raise UnknownEdge(f"gluing references missing edge {side}")
    assert cell_a is not None and cell_b is not None
    la2, lb2 = cell_a.edge_length2(gluing.side_a.edge), cell_b.edge_length2(gluing.side_b.edge)
    if is_exact_number(la2) and is_exact_number(lb2):
        equal = la2 == lb2
    else:
        la, lb = math.sqrt(float(la2)), math.sqrt(float(lb2))
        equal = abs(la - lb) <= tol * max(1.0, la)
    if not equal:
        raise LengthMismatch(
            f"{gluing.side_a} and {gluing.side_b} have different lengths",
            lengths=(float(la2) ** 0.5, float(lb2) ** 0.5),
        )
    a0, a1 = cell_a.edge(gluing.side_a.edge)
    b0, b1 = cell_b.edge(gluing.side_b.edge)
    g0, g1 = gluing.map.apply(a0), gluing.map.apply(a1)
    flipped = _points_match(g0, b1, tol) and _points_match(g1, b0, tol)
    straight = _points_match(g0, b0, tol) and _points_match(g1, b1, tol)
    expected, other = (straight, flipped) if gluing.map.reflect else (flipped, straight)
    if expected:
        return
    if other:
        raise BadOrientation(
            f"gluing {gluing.side_a} -> {gluing.side_b} leaves both cells on one side"
        )
    raise MapMismatch(f"gluing map does not carry {gluing.side_a} onto {gluing.side_b}")


def validate_surface(surface: Surface, tolerance: Optional[float] = None) -> None:
    """Check every invariant over the instantiated cells; raise on the first violation."""
    tol = tolerance if tolerance is not None else get_settings().geom_tolerance
    cells = surface.cells
    if not cells:
        raise InvalidCell("surface has no cells")
    for cell in cells.values():
        _check_cell(cell, tol)
    graph = nx.Graph()
    graph.add_nodes_from(cells)
    parity: dict[CellId, bool] = {}
    for gluing in surface.gluings():
        a, b = gluing.side_a.cell, gluing.side_b.cell
        if surface.is_lazy and (surface.try_cell(a) is None or surface.try_cell(b) is None):
            continue
        _check_gluing(surface, gluing, tol)
        if a in cells and b in cells:
            graph.add_edge(a, b)
    if not nx.is_connected(graph):
        parts = nx.number_connected_components(graph)
        raise Disconnected(f"surface falls apart into {parts} components")
    root = surface.cell_ids()[0]
    parity[root] = False
    stack = [root]
    while stack:
        cid = stack.pop()
        for i in range(cells[cid].n):
            gluing = surface.partner(EdgeRef(cid, i))
            if gluing is None or gluing.side_b.cell not in cells:
                continue
            other = gluing.side_b.cell
            expected = parity[cid] != gluing.map.reflect
            if other not in parity:
                parity[other] = expected
                stack.append(other)
            elif parity[other] != expected:
                raise NonOrientable(f"orientation conflict between cells {cid!r} and {other!r}")


def build_surface(
    cells: Iterable[Cell],
    gluings: Iterable[Gluing] = (),
    tags: Optional[Mapping[EdgeRef, str]] = None,
    provider: Optional[CellProvider] = None,
    name: str = "",
    period: Optional[Vec] = None,
    tolerance: Optional[float] = None,
    window: Optional[Window] = None,
    metadata: Optional[dict[str, Any]] = None,
) -> Surface:
    """Assemble and validate a surface.

    Args:
        cells: Cells (for lazy surfaces, may be empty)
        gluings: Gluings between the given cells
        tags: Labels of boundary edges (wall, obstacle, barrier, ...)
        provider: Lazy block generator
        name: Display name
        period: Translation vector of one Z-step, for periodic quotients
        tolerance: Incidence tolerance; defaults to settings
        window: For lazy surfaces, the window instantiated for validation

    Returns:
        The validated Surface
    """
    surface = Surface(cells, gluings, tags, provider, name, period, metadata)
    if provider is not None:
        surface.instantiate(window or Window.square(3.0))
    validate_surface(surface, tolerance)
    logger.debug(
        "built %s: %d cells, %d gluings, %d boundary edges",
        surface.name or "surface",
        len(surface.cells),
        len(surface.gluings()),
        len(surface.boundary_edges()),
    )
    return surface


# Vertices


class VertexKind(str, Enum):
    REGULAR_INTERIOR = "RegularInterior"
    REGULAR_BOUNDARY = "RegularBoundary"
    CONE_POINT = "ConePoint"
    WEDGE_POINT = "WedgePoint"

    @property
    def is_singular(self) -> bool:
        return self in (VertexKind.CONE_POINT, VertexKind.WEDGE_POINT)


def _angle_equals(a: Angle, b: Angle, tol: float) -> bool:
    if a.pi_units is not None and b.pi_units is not None:
        return a.pi_units == b.pi_units
    return abs(a.to_radians() - b.to_radians()) <= tol


def classify_vertex(total: Angle, boundary: bool, tol: float = 1e-9) -> VertexKind:
    if boundary:
        regular = _angle_equals(total, Angle.exact(1), tol)
        return VertexKind.REGULAR_BOUNDARY if regular else VertexKind.WEDGE_POINT
    regular = _angle_equals(total, Angle.exact(2), tol)
    return VertexKind.REGULAR_INTERIOR if regular else VertexKind.CONE_POINT


@dataclass(frozen=True)
class VertexClass:
    kind: VertexKind
    total_angle: Angle
    corners: tuple[Corner, ...]
    point: Point  # location in the chart of the first corner
    complete: bool = True  # False when the class runs out of an instantiated window

    @property
    def is_boundary(self) -> bool:
        return self.kind in (VertexKind.REGULAR_BOUNDARY, VertexKind.WEDGE_POINT)

    @property
    def is_singular(self) -> bool:
        return self.kind.is_singular


def _sum_angles(angles: Iterable[Angle]) -> Angle:
    total = Angle.zero()
    for angle in angles:
        total = total + angle
    return total


def vertex_angles(
    surface: Surface,
    window: Optional[Window] = None,
    tolerance: Optional[float] = None,
) -> dict[Corner, VertexClass]:
    """Group cell corners into surface vertices and classify them.

    Args:
        surface: A finite surface, or a lazy one together with ``window``
        window: Window of a lazy surface to classify
        tolerance: Angle tolerance for inexact totals

    Returns:
        Map from the representative corner of each vertex to its class
    """
    tol = tolerance if tolerance is not None else get_settings().geom_tolerance
    if surface.is_lazy:
        surface = surface.restrict(window or Window.square(3.0))
    cells = surface.cells
    corners = UnionFind()
    boundary: set[Corner] = set()
    partial: set[Corner] = set()
    for cid, cell in cells.items():
        n = cell.n
        for i in range(n):
            corners[(cid, i)]
            ref = EdgeRef(cid, i)
            gluing = surface.partner(ref)
            start, end = (cid, i), (cid, (i + 1) % n)
            if gluing is None:
                boundary.update((start, end))
                if surface.tag(ref) == WINDOW_TAG:
                    partial.update((start, end))
                continue
            other = gluing.side_b
            m = cells[other.cell].n
            o_start, o_end = (other.cell, other.edge), (other.cell, (other.edge + 1) % m)
            if gluing.map.reflect:
                corners.union(start, o_start)
                corners.union(end, o_end)
            else:
                corners.union(start, o_end)
                corners.union(end, o_start)
    result: dict[Corner, VertexClass] = {}
    for group in corners.to_sets():
        members = tuple(sorted(group, key=lambda c: (sort_key(c[0]), c[1])))
        total = _sum_angles(cells[c].corner_angle(i) for c, i in members)
        is_boundary = any(c in boundary for c in members)
        representative = members[0]
        result[representative] = VertexClass(
            kind=classify_vertex(total, is_boundary, tol),
            total_angle=total,
            corners=members,
            point=cells[representative[0]].vertices[representative[1]],
            complete=not any(c in partial for c in members),
        )
    return result


@dataclass(frozen=True)
class FanCorner:
    cell: CellId
    corner: int
    to_start: Isometry  # chart of this corner's cell -> chart of the starting cell
    shift: int  # accumulated Z-label from the starting cell


@dataclass(frozen=True)
class CornerFan:
    """All corners around one surface vertex, in rotational order."""

    corners: tuple[FanCorner, ...]
    total_angle: Angle
    boundary: bool
    kind: VertexKind
    boundary_edges: tuple[EdgeRef, ...] = ()
    complete: bool = True  # False when the walk ran out of instantiated cells


def corner_fan(
    surface: Surface,
    cell: CellId,
    corner: int,
    tolerance: Optional[float] = None,
    max_steps: int = 10_000,
) -> CornerFan:
    """Walk around the vertex at ``corner`` of ``cell`` through the gluings.

    Works on lazy surfaces, instantiating neighbors as it goes.
    """
    tol = tolerance if tolerance is not None else get_settings().geom_tolerance
    start_cell = surface.cell(cell)
    n0 = start_cell.n
    corner %= n0

    def walk(first_edge: int) -> tuple[list[FanCorner], Optional[EdgeRef], bool]:
        # returns (corners, boundary edge or None, closed)
        found: list[FanCorner] = []
        cid, k, cross = cell, corner, first_edge
        chart = Isometry.identity()  # start chart -> current chart
        shift = 0
        for _ in range(max_steps):
            gluing = surface.partner(EdgeRef(cid, cross))
            if gluing is None:
                return found, EdgeRef(cid, cross), False
            target = surface.try_cell(gluing.side_b.cell)
            if target is None:
                return found, None, False
            e = gluing.side_b.edge
            m = target.n
            at_start = cross == k
            if gluing.map.reflect:
                k_next = e if at_start else (e + 1) % m
            else:
                k_next = (e + 1) % m if at_start else e
            cid, k = gluing.side_b.cell, k_next
            chart = gluing.map.compose(chart)
            shift += gluing.shift
            if cid == cell and k == corner:
                return found, None, True
            found.append(FanCorner(cid, k, chart.inverse(), shift))
            cross = (k - 1) % m if e == k else k
        raise GeometryError(f"vertex at {cell}:{corner} has unbounded corner count")

    forward, forward_end, closed = walk(corner)
    start = FanCorner(cell, corner, Isometry.identity(), 0)
    if closed:
        ordered = [start, *forward]
        ends: tuple[EdgeRef, ...] = ()
    else:
        backward, backward_end, _ = walk((corner - 1) % n0)
        ordered = [*reversed(backward), start, *forward]
        ends = tuple(e for e in (backward_end, forward_end) if e is not None)
    complete = closed or (
        len(ends) == 2 and all(surface.tag(e) != WINDOW_TAG for e in ends)
    )
    total = _sum_angles(surface.cell(c.cell).corner_angle(c.corner) for c in ordered)
    boundary = not closed
    return CornerFan(
        corners=tuple(ordered),
        total_angle=total,
        boundary=boundary,
        kind=classify_vertex(total, boundary, tol),
        boundary_edges=ends,
        complete=complete,
    )


# Doubling


def _double_ids(cid: CellId) -> tuple[str, str]:
    return f"{cid}'", f"{cid}''"


def double_surface(surface: Surface, keep_open: Iterable[EdgeRef] = ()) -> Surface:
    """Glue two copies of ``surface`` along its boundary minus ``keep_open``.

    Args:
        surface: A finite surface with nonempty boundary
        keep_open: Boundary edges left unglued in both copies

    Returns:
        The doubled surface; its boundary is both copies of ``keep_open``
    """
    if surface.is_lazy:
        raise GeometryError("double a finite window of a lazy surface (Surface.restrict)")
    boundary = surface.boundary_edges()
    keep = set(keep_open)
    unknown = keep - set(boundary)
    if unknown:
        raise UnknownEdge(f"not boundary edges: {', '.join(map(str, sorted(unknown)))}")
    glued = [e for e in boundary if e not in keep]
    if not glued:
        raise EmptyGlueSet("nothing left to glue: the two copies would stay disconnected")

    cells: list[Cell] = []
    projection: dict[CellId, CellId] = {}
    for cid in surface.cell_ids():
        cell = surface.cell(cid)
        for new_id in _double_ids(cid):
            cells.append(Cell(new_id, cell.vertices, cell.headings))
            projection[new_id] = cid
    gluings: list[Gluing] = []
    for g in surface.gluings():
        for copy in (0, 1):
            gluings.append(
                Gluing(
                    EdgeRef(_double_ids(g.side_a.cell)[copy], g.side_a.edge),
                    EdgeRef(_double_ids(g.side_b.cell)[copy], g.side_b.edge),
                    g.map,
                    g.shift,
                )
            )
    for edge in glued:
        cell = surface.cell(edge.cell)
        start, _ = cell.edge(edge.edge)
        heading = cell.heading(edge.edge) if cell.headings is not None else None
        reflection = Isometry.reflection_in_line(start, cell.edge_vector(edge.edge), heading)
        first, second = _double_ids(edge.cell)
        gluings.append(Gluing(EdgeRef(first, edge.edge), EdgeRef(second, edge.edge), reflection))
    tags = {}
    for edge in keep:
        for new_id in _double_ids(edge.cell):
            tags[EdgeRef(new_id, edge.edge)] = surface.tag(edge)
    return build_surface(
        cells,
        gluings,
        tags,
        name=f"D({surface.name})",
        period=surface.period,
        metadata={"projection": projection},
    )


def doubling_projection(double: Surface) -> dict[CellId, CellId]:
    """The natural 2-to-1 map from a doubled surface's cells to the original cells."""
    projection = double.metadata.get("projection")
    if projection is None:
        raise GeometryError("surface was not produced by double_surface")
    return dict(projection)


def euler_characteristic(surface: Surface) -> int:
    """V - E + F of a finite cell complex."""
    if surface.is_lazy:
        raise GeometryError("Euler characteristic needs a finite surface")
    vertices = len(vertex_angles(surface))
    edges = len(surface.gluings()) + len(surface.boundary_edges())
    return vertices - edges + len(surface.cells)


# Conditions A, B, C


@dataclass
class ConditionsReport:
    """Local finiteness report of a (possibly infinite) surface over a window."""

    window: Window
    sides_met: int  # boundary sides meeting the window
    min_side: Optional[float]  # shortest side, None without boundary
    min_side_flag: bool  # True when min_side is below the threshold
    threshold: float
    max_multiplicity: int  # most preimages of one surface point
    side_lengths: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.min_side_flag


def _is_cut(gluing: Gluing, tol: float) -> bool:
    """True for the identity gluings left by subdividing one polygon into cells."""
    if gluing.shift or not gluing.map.is_linear_identity(tol):
        return False
    return all(abs(float(c)) <= tol for c in gluing.map.translation)


def _max_preimages(surface: Surface, classes: Mapping[Corner, VertexClass]) -> int:
    """Largest number of polygon points sent to one point of the surface.

    Corners joined by cut gluings are the same point of the polygon, so each
    vertex class counts its cut-connected groups. Interior points of a true
    gluing have two preimages.
    """
    tol = get_settings().geom_tolerance
    points = UnionFind()
    folds = False
    for gluing in surface.gluings():
        if not _is_cut(gluing, tol):
            folds = True
            continue
        a, b = gluing.side_a, gluing.side_b
        n, m = surface.cell(a.cell).n, surface.cell(b.cell).n
        points.union((a.cell, a.edge), (b.cell, (b.edge + 1) % m))
        points.union((a.cell, (a.edge + 1) % n), (b.cell, b.edge))
    best = 2 if folds else 1
    for vertex in classes.values():
        best = max(best, len({points[c] for c in vertex.corners}))
    return best


def validate_conditions(
    surface: Surface,
    window: Window,
    threshold: Optional[float] = None,
) -> ConditionsReport:
    """Side statistics and the largest fiber of the surface over a window.

    Collinear boundary edges meeting at regular boundary vertices count as
    one side. Edges cut by the window are not sides.
    """
    settings = get_settings()
    threshold = threshold if threshold is not None else settings.min_side_threshold
    local = surface.restrict(window) if surface.is_lazy else surface
    classes = vertex_angles(local)
    edges = [e for e in local.boundary_edges() if local.tag(e) != WINDOW_TAG]
    graph = nx.Graph()
    graph.add_nodes_from(edges)
    by_corner: dict[Corner, list[EdgeRef]] = defaultdict(list)
    for edge in edges:
        n = local.cell(edge.cell).n
        by_corner[(edge.cell, edge.edge)].append(edge)
        by_corner[(edge.cell, (edge.edge + 1) % n)].append(edge)
    for vertex in classes.values():
        if vertex.kind != VertexKind.REGULAR_BOUNDARY:
            continue
        touching = [e for c in vertex.corners for e in by_corner.get(c, [])]
        for a, b in zip(touching, touching[1:]):
            graph.add_edge(a, b)
    lengths = []
    for component in nx.connected_components(graph):
        members = list(component)
        if not any(window.meets(local.cell(e.cell)) for e in members):
            continue
        lengths.append(sum(local.cell(e.cell).edge_length(e.edge) for e in members))
    multiplicity = _max_preimages(local, classes)
    min_side = min(lengths) if lengths else None
    flag = min_side is not None and min_side < threshold
    if flag:
        logger.warning("side of length %.3g below threshold %.3g", min_side, threshold)
    return ConditionsReport(
        window=window,
        sides_met=len(lengths),
        min_side=min_side,
        min_side_flag=flag,
        threshold=threshold,
        max_multiplicity=multiplicity,
        side_lengths=sorted(lengths),
    )


def iter_edges(surface: Surface) -> Iterator[EdgeRef]:
    for cid in surface.cell_ids():
        for i in range(surface.cell(cid).n):
            yield EdgeRef(cid, i)


def glue_matching(
    pieces_a: Sequence[EdgeRef],
    pieces_b: Sequence[EdgeRef],
    surface_cells: Mapping[CellId, Cell],
    translation: Vec,
    shift: int = 0,
) -> list[Gluing]:
    """Translation gluings between two lists of edges that match after translating.

    Used for period and wraparound gluings of subdivided sides; each piece of
    ``pieces_a`` must meet a piece of ``pieces_b`` with reversed endpoints.
    """
    gluings = []
    remaining = list(pieces_b)
    iso = Isometry.translation_by(*translation)
    for a in pieces_a:
        start, end = surface_cells[a.cell].edge(a.edge)
        image = (iso.apply(end), iso.apply(start))
        for b in remaining:
            b_start, b_end = surface_cells[b.cell].edge(b.edge)
            if _points_match(image[0], b_start, 1e-9) and _points_match(image[1], b_end, 1e-9):
                gluings.append(Gluing(a, b, iso, shift))
                remaining.remove(b)
                break
        else:
            raise GeometryError(f"no partner for side piece {a} under translation {translation}")
    return gluings
