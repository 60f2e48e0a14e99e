"""Parameterized constructors for the catalog of surface families."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linprog

from .angles import Angle, Number, is_exact_number, parse_number
from .decompose import Decomposition, Obstacle, Segment, decompose_box
from .errors import BarrierCollision, NotPeriodic, ParamOutOfRange, UnknownFamily
from .geometry import (
    Block,
    Cell,
    CellId,
    EdgeRef,
    Gluing,
    Point,
    Surface,
    Window,
    _segments_cross,
    build_surface,
    double_surface,
    glue_matching,
)
from .isometry import Isometry
from .unfolding import origami_from_polygon

logger = logging.getLogger(__name__)

ParamValue = Union[str, int, float, Fraction]

WALL = "wall"
BARRIER = "barrier"
OBSTACLE = "obstacle"


class FamilySpec(BaseModel):
    """A family identifier with parameter values.

    Values are strings ("1/2", "0.3", "rad:0.7") or numbers; angle
    parameters are in units of pi unless given as "rad:FLOAT".
    """

    family: str
    params: dict[str, ParamValue] = Field(default_factory=dict)

    @classmethod
    def parse(cls, family: str, items: Iterable[str]) -> FamilySpec:
        params: dict[str, ParamValue] = {}
        for item in items:
            if "=" not in item:
                raise ParamOutOfRange(f"parameter {item!r} is not key=value")
            key, value = item.split("=", 1)
            params[key.strip()] = value.strip()
        return cls(family=family, params=params)


@dataclass(frozen=True)
class Family:
    name: str
    builder: Callable[..., Surface]
    defaults: dict[str, ParamValue]
    angles: tuple[str, ...] = ()  # parameters read as angles
    periodic: bool = False
    description: str = ""


_FAMILIES: dict[str, Family] = {}


def family(
    name: str,
    defaults: dict[str, ParamValue],
    angles: tuple[str, ...] = (),
    periodic: bool = False,
    description: str = "",
) -> Callable[[Callable[..., Surface]], Callable[..., Surface]]:
    def register(builder: Callable[..., Surface]) -> Callable[..., Surface]:
        _FAMILIES[name] = Family(name, builder, defaults, angles, periodic, description)
        return builder

    return register


def list_families() -> list[Family]:
    return [_FAMILIES[k] for k in sorted(_FAMILIES)]


def get_family(name: str) -> Family:
    try:
        return _FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted(_FAMILIES))
        raise UnknownFamily(f"unknown family {name!r} (known: {known})") from None


def _parse_value(key: str, value: ParamValue, is_angle: bool) -> Any:
    if is_angle:
        if isinstance(value, Angle):
            return value
        if isinstance(value, float):
            return Angle.radians(value * math.pi)
        try:
            return Angle.parse(str(value))
        except ValueError as exc:
            raise ParamOutOfRange(f"{key}: {exc}") from exc
    if isinstance(value, str):
        if "," in value or ";" in value:
            return value
        try:
            return parse_number(value)
        except ValueError:
            return value
    return value


def make_family(spec: Union[FamilySpec, str], **params: ParamValue) -> Surface:
    """Build a validated surface of a catalog family.

    Z-periodic families return their compact quotient with shift-labeled
    period gluings, unless asked for a lazy surface.

    Raises:
        UnknownFamily: No family of that name
        ParamOutOfRange: A parameter is unknown, malformed or out of range
        BarrierCollision: Barriers degenerate or cross
    """
    if isinstance(spec, str):
        spec = FamilySpec(family=spec, params=dict(params))
    entry = get_family(spec.family)
    unknown = set(spec.params) - set(entry.defaults)
    if unknown:
        raise ParamOutOfRange(
            f"{entry.name}: unknown parameters {', '.join(sorted(unknown))}"
        )
    merged = {**entry.defaults, **spec.params}
    values = {k: _parse_value(k, v, k in entry.angles) for k, v in merged.items()}
    surface = entry.builder(**values)
    surface.metadata.setdefault("family", entry.name)
    surface.metadata.setdefault("params", {k: str(v) for k, v in merged.items()})
    logger.debug("made %s with %s", entry.name, surface.metadata["params"])
    return surface


# Helpers


def _positive(name: str, value: Number) -> None:
    if float(value) <= 0:
        raise ParamOutOfRange(f"{name} must be positive, got {value}")


def _half(value: Number) -> Number:
    return Fraction(value) / 2 if is_exact_number(value) else value / 2


def _cos_sin(angle: Angle) -> tuple[Number, Number]:
    exact = angle.exact_cos_sin()
    return exact if exact is not None else (angle.cos(), angle.sin())


def _barrier_length(length: Number) -> None:
    if float(length) == 0:
        raise BarrierCollision("barrier endpoints coincide")
    _positive("l", length)


def _barrier(a: Number, b: Number, length: Number, theta: Angle) -> Segment:
    _barrier_length(length)
    c, s = _cos_sin(theta)
    end = (a + length * c, b + length * s)
    return Segment((a, b), end, theta.normalized(), BARRIER)


def _rectangle(a: Number, b: Number, xi: Number, eta: Number) -> Obstacle:
    _positive("a", a)
    _positive("b", b)
    vertices = ((xi, eta), (xi + a, eta), (xi + a, eta + b), (xi, eta + b))
    headings = (Angle.zero(), Angle.exact(1, 2), Angle.exact(1), Angle.exact(3, 2))
    return Obstacle(vertices, headings)


def _rotated(obstacle: Obstacle, angle: Angle, center: Point) -> Obstacle:
    rotation = Isometry.rotation_by(angle, center)
    vertices = tuple(rotation.apply(v) for v in obstacle.vertices)
    headings = None
    if obstacle.headings is not None:
        headings = tuple((h + angle).normalized() for h in obstacle.headings)
    return Obstacle(vertices, headings, obstacle.tag)


def _shifted(obstacle: Obstacle, dx: Number, dy: Number) -> Obstacle:
    vertices = tuple((x + dx, y + dy) for x, y in obstacle.vertices)
    return Obstacle(vertices, obstacle.headings, obstacle.tag)


def _check_rotation_room(obstacle: Obstacle, center: Point, box: tuple[float, ...]) -> None:
    """Every rotation of the obstacle about ``center`` stays inside the open box."""
    cx, cy = float(center[0]), float(center[1])
    radius = max(math.hypot(float(x) - cx, float(y) - cy) for x, y in obstacle.vertices)
    x0, x1, y0, y1 = box
    room = min(cx - x0, x1 - cx, cy - y0, y1 - cy)
    if radius >= room:
        raise ParamOutOfRange(
            f"obstacle rotated about ({cx:g}, {cy:g}) leaves the unit cell (radius {radius:g})"
        )


def _check_crossing(segments: list[Segment]) -> None:
    for i, s in enumerate(segments):
        for t in segments[i + 1 :]:
            a = (float(s.start[0]), float(s.start[1]))
            b = (float(s.end[0]), float(s.end[1]))
            c = (float(t.start[0]), float(t.start[1]))
            d = (float(t.end[0]), float(t.end[1]))
            if _segments_cross(a, b, c, d, 1e-12):
                raise BarrierCollision("barriers meet")


def _cylinder(
    dec: Decomposition,
    width: Number = 1,
    glue_top: bool = False,
    horizontal_shift: int = 1,
    vertical_shift: int = 0,
) -> tuple[list[Gluing], dict[EdgeRef, str]]:
    """Side gluings of a decomposed box: left/right always, top/bottom optionally."""
    cells = dec.cell_map()
    gluings = list(dec.gluings)
    tags = dict(dec.tags)
    gluings += glue_matching(dec.right, dec.left, cells, (-width, 0), horizontal_shift)
    if glue_top:
        gluings += glue_matching(dec.top, dec.bottom, cells, (0, -1), vertical_shift)
    else:
        for ref in (*dec.bottom, *dec.top):
            tags[ref] = WALL
    return gluings, tags


def _band_quotient(
    name: str,
    obstacles: Sequence[Obstacle] = (),
    barriers: Sequence[Segment] = (),
    periodic: bool = True,
) -> Surface:
    dec = decompose_box((0, 1, 0, 1), obstacles, barriers)
    gluings, tags = _cylinder(dec, horizontal_shift=1 if periodic else 0)
    return build_surface(
        dec.cells, gluings, tags, name=name, period=(1, 0) if periodic else None
    )


# Compact and Z-periodic families


@family("torus", {"period": "none"}, description="standard torus R^2/Z^2")
def torus(period: str = "none") -> Surface:
    """Unit square torus; ``period`` labels horizontal or vertical crossings with shift 1."""
    if period not in ("none", "vertical", "horizontal"):
        raise ParamOutOfRange(f"period must be none, vertical or horizontal, got {period!r}")
    cell = Cell(
        0,
        ((0, 0), (1, 0), (1, 1), (0, 1)),
        (Angle.zero(), Angle.exact(1, 2), Angle.exact(1), Angle.exact(3, 2)),
    )
    right, up = int(period == "horizontal"), int(period == "vertical")
    gluings = [
        Gluing(EdgeRef(0, 1), EdgeRef(0, 3), Isometry.translation_by(-1, 0), right),
        Gluing(EdgeRef(0, 2), EdgeRef(0, 0), Isometry.translation_by(0, -1), up),
    ]
    vector = {"none": None, "vertical": (0, 1), "horizontal": (1, 0)}[period]
    return build_surface([cell], gluings, name="torus", period=vector)


@family("cylinder", {"periodic": 1}, periodic=True, description="standard cylinder, R x [0, 1] over Z")
def cylinder(periodic: int = 1) -> Surface:
    return _band_quotient("cylinder", periodic=bool(periodic))


@family(
    "torus_barrier",
    {"l": "1/2", "eta": "0", "ax": "", "ay": ""},
    angles=("eta",),
    description="torus with one linear barrier of length l and angle eta",
)
def torus_barrier(l: Number, eta: Angle, ax: Any = "", ay: Any = "") -> Surface:  # noqa: E741
    """Flat torus minus a slit of length l in direction eta.

    The slit is centered in the unit square unless its start (ax, ay) is
    given; it must lie inside the open square.
    """
    _barrier_length(l)
    c, s = _cos_sin(eta)
    if ax == "" or ay == "":
        ax = (1 - l * c) / 2
        ay = (1 - l * s) / 2
    barrier = _barrier(ax, ay, l, eta)
    dec = decompose_box((0, 1, 0, 1), barriers=[barrier])
    gluings, tags = _cylinder(dec, glue_top=True, horizontal_shift=0)
    return build_surface(dec.cells, gluings, tags, name=f"slit-torus({l},{eta})")


@family(
    "cylinder_two_barriers",
    {
        "a1": "1/4", "b1": "1/4", "l1": "1/2", "theta1": "0",
        "a2": "1/4", "b2": "1/2", "l2": "1/4", "theta2": "1/4",
    },
    angles=("theta1", "theta2"),
    periodic=True,
    description="infinite cylinder with two Z-periodic collections of barriers",
)
def cylinder_two_barriers(
    a1: Number, b1: Number, l1: Number, theta1: Angle,
    a2: Number, b2: Number, l2: Number, theta2: Angle,
) -> Surface:
    """Unit torus minus two barriers, with horizontal crossings labeled."""
    barriers = [_barrier(a1, b1, l1, theta1), _barrier(a2, b2, l2, theta2)]
    _check_crossing(barriers)
    dec = decompose_box((0, 1, 0, 1), barriers=barriers)
    gluings, tags = _cylinder(dec, glue_top=True, horizontal_shift=1)
    return build_surface(dec.cells, gluings, tags, name="torus-two-barriers", period=(1, 0))


@family(
    "band_barriers",
    {"a": "1/2", "b": "1/4", "l": "1/2", "theta": "1/2"},
    angles=("theta",),
    periodic=True,
    description="standard band with Z-periodic linear barriers",
)
def band_barriers(a: Number, b: Number, l: Number, theta: Angle) -> Surface:  # noqa: E741
    return _band_quotient(f"band-barriers({a},{b},{l},{theta})", barriers=[_barrier(a, b, l, theta)])


@family(
    "band_horizontal_barriers",
    {"l": "1/2", "height": "1/2", "x0": ""},
    periodic=True,
    description="standard band with Z-periodic horizontal barriers",
)
def band_horizontal_barriers(l: Number, height: Number, x0: Any = "") -> Surface:  # noqa: E741
    if not 0 < float(l) < 1:
        raise ParamOutOfRange(f"l must lie in (0, 1), got {l}")
    start = (1 - l) / 2 if x0 == "" else x0
    barrier = _barrier(start, height, l, Angle.zero())
    return _band_quotient(f"band-horizontal({l},{height})", barriers=[barrier])


@family(
    "band_rect_obstacles",
    {"a": "1/2", "b": "1/4", "xi": "1/4", "eta": "1/4"},
    periodic=True,
    description="standard band with Z-periodic rectangular obstacles",
)
def band_rect_obstacles(a: Number, b: Number, xi: Number, eta: Number) -> Surface:
    return _band_quotient(f"band-rect({a},{b};{xi},{eta})", obstacles=[_rectangle(a, b, xi, eta)])


@family(
    "band_tilted_rect",
    {"a": "1/4", "b": "1/8", "xi": "3/8", "eta": "7/16", "theta": "1/3"},
    angles=("theta",),
    periodic=True,
    description="standard band with Z-periodic tilted rectangles",
)
def band_tilted_rect(a: Number, b: Number, xi: Number, eta: Number, theta: Angle) -> Surface:
    """Cylinder minus the a x b rectangle at (xi, eta), rotated by theta about its center."""
    rect = _rectangle(a, b, xi, eta)
    center = (xi + _half(a), eta + _half(b))
    _check_rotation_room(rect, center, (0.0, 1.0, 0.0, 1.0))
    return _band_quotient(f"band-tilted({theta})", obstacles=[_rotated(rect, theta, center)])


# Quasi-periodic band


@dataclass
class RotatedBandProvider:
    """Block k is the unit cell [k, k+1] x [0, 1] minus the obstacle rotated by k alpha."""

    obstacle: Obstacle
    alpha: Angle
    center: Point
    _cache: dict[int, Decomposition] = field(default_factory=dict)

    def decomposition(self, k: int) -> Decomposition:
        dec = self._cache.get(k)
        if dec is None:
            placed = _shifted(_rotated(self.obstacle, self.alpha * k, self.center), k, 0)
            dec = decompose_box((k, k + 1, 0, 1), [placed], prefix=f"b{k}.c")
            self._cache[k] = dec
        return dec

    def block(self, index: int) -> Optional[Block]:
        dec = self.decomposition(index)
        gluings = list(dec.gluings)
        before, after = self.decomposition(index - 1), self.decomposition(index + 1)
        cells = {**dec.cell_map(), **before.cell_map(), **after.cell_map()}
        gluings += glue_matching(before.right, dec.left, cells, (0, 0))
        gluings += glue_matching(dec.right, after.left, cells, (0, 0))
        tags = dict(dec.tags)
        for ref in (*dec.bottom, *dec.top):
            tags[ref] = WALL
        return Block(tuple(dec.cells), tuple(gluings), tags)

    def block_of(self, cell: CellId) -> Optional[int]:
        if not isinstance(cell, str) or not cell.startswith("b") or "." not in cell:
            return None
        try:
            return int(cell[1:].split(".", 1)[0])
        except ValueError:
            return None

    def blocks_in(self, window: Window) -> Iterable[int]:
        return range(math.floor(window.xmin) - 1, math.ceil(window.xmax) + 1)


def _rotation_period(alpha: Angle) -> Optional[int]:
    """Smallest m > 0 with m alpha in 2 pi Z, for exact alpha."""
    if alpha.pi_units is None:
        return None
    return (alpha.pi_units / 2 % 1).denominator


@family(
    "band_rotated_obstacles",
    {"a": "1/4", "b": "1/8", "xi": "3/8", "eta": "7/16", "alpha": "1/2",
     "ox": "", "oy": "", "lazy": 0},
    angles=("alpha",),
    periodic=True,
    description="band with obstacles rotated by k alpha in the k-th cell",
)
def band_rotated_obstacles(
    a: Number, b: Number, xi: Number, eta: Number, alpha: Angle,
    ox: Any = "", oy: Any = "", lazy: int = 0,
) -> Surface:
    """Periodic (alpha/pi rational) or quasi-periodic band with rotated rectangles.

    The rotation center defaults to the centroid of the rectangle. Rational
    alpha gives a compact quotient of period m = order of the rotation;
    irrational alpha, or ``lazy=1``, gives a lazy surface over the integers.
    """
    rect = _rectangle(a, b, xi, eta)
    center = (
        xi + _half(a) if ox == "" else ox,
        eta + _half(b) if oy == "" else oy,
    )
    _check_rotation_room(rect, center, (0.0, 1.0, 0.0, 1.0))
    provider = RotatedBandProvider(rect, alpha, center)
    period = _rotation_period(alpha)
    quotient = None
    if period is not None:
        decs = [provider.decomposition(k) for k in range(period)]
        cells = [c for d in decs for c in d.cells]
        cell_map = {c.id: c for c in cells}
        gluings: list[Gluing] = []
        tags: dict[EdgeRef, str] = {}
        for k, dec in enumerate(decs):
            gluings += dec.gluings
            tags.update(dec.tags)
            for ref in (*dec.bottom, *dec.top):
                tags[ref] = WALL
            if k + 1 < period:
                gluings += glue_matching(dec.right, decs[k + 1].left, cell_map, (0, 0))
        gluings += glue_matching(decs[-1].right, decs[0].left, cell_map, (-period, 0), 1)
        quotient = build_surface(
            cells, gluings, tags, name=f"band-rot({alpha})", period=(period, 0)
        )
        if not lazy:
            return quotient
    metadata = {"quotient": quotient} if quotient is not None else {}
    return build_surface(
        [],
        provider=provider,
        name=f"band-rot({alpha})~",
        period=quotient.period if quotient is not None else None,
        window=Window(-2, 2, 0, 1),
        metadata=metadata,
    )


# Stairways


@dataclass
class StairwayProvider:
    """Block k is the rectangle [k, k+1] x [0, h_k]; k >= 0."""

    height: Callable[[int], Number]
    steps: Optional[int] = None

    def _exists(self, k: int) -> bool:
        return k >= 0 and (self.steps is None or k < self.steps)

    def cell(self, k: int) -> tuple[Cell, dict[str, list[int]]]:
        """The k-th rectangle, with its right and left sides split where neighbors differ."""
        h = self.height(k)
        vertices: list[Point] = [(k, 0), (k + 1, 0)]
        headings = [Angle.zero()]
        right = self.height(k + 1) if self._exists(k + 1) else None
        if right is not None and float(right) < float(h):
            vertices.append((k + 1, right))
            headings.append(Angle.exact(1, 2))
        vertices += [(k + 1, h), (k, h)]
        headings += [Angle.exact(1, 2), Angle.exact(1)]
        left = self.height(k - 1) if self._exists(k - 1) else None
        if left is not None and float(left) < float(h):
            vertices.append((k, left))
            headings.append(Angle.exact(3, 2))
        headings.append(Angle.exact(3, 2))
        n = len(vertices)
        sides = {
            "right": [i for i in range(n) if headings[i] == Angle.exact(1, 2)],
            "left": [i for i in range(n) if headings[i] == Angle.exact(3, 2)],
        }
        return Cell(f"s{k}", tuple(vertices), tuple(headings)), sides

    def block(self, index: int) -> Optional[Block]:
        if not self._exists(index):
            return None
        cell, sides = self.cell(index)
        gluings = []
        glued: set[int] = set()
        for k, side, other_side in ((index, "right", "left"), (index - 1, "right", "left")):
            if not (self._exists(k) and self._exists(k + 1)):
                continue
            a_cell, a_sides = self.cell(k)
            b_cell, b_sides = self.cell(k + 1)
            # the shared piece starts at height 0 on both sides
            a_edge = next(i for i in a_sides[side] if a_cell.edge(i)[0][1] == 0)
            b_edge = next(i for i in b_sides[other_side] if b_cell.edge(i)[1][1] == 0)
            gluings.append(
                Gluing(EdgeRef(a_cell.id, a_edge), EdgeRef(b_cell.id, b_edge), Isometry.identity())
            )
            if k == index:
                glued.add(a_edge)
            else:
                glued.add(b_edge)
        tags = {EdgeRef(cell.id, i): WALL for i in range(cell.n) if i not in glued}
        return Block((cell,), tuple(gluings), tags)

    def block_of(self, cell: CellId) -> Optional[int]:
        if isinstance(cell, str) and cell.startswith("s"):
            try:
                return int(cell[1:])
            except ValueError:
                return None
        return None

    def blocks_in(self, window: Window) -> Iterable[int]:
        start = max(0, math.floor(window.xmin) - 1)
        stop = math.ceil(window.xmax) + 1
        if self.steps is not None:
            stop = min(stop, self.steps)
        return range(start, max(start, stop))


def _heights(
    heights: Any, h0: Number, ratio: Number
) -> tuple[Callable[[int], Number], Optional[int]]:
    if isinstance(heights, str) and heights:
        values = [parse_number(v) for v in heights.split(",")]
        for v in values:
            _positive("heights", v)
        return (lambda k: values[k]), len(values)
    _positive("h0", h0)
    _positive("ratio", ratio)
    return (lambda k: h0 * ratio**k), None


@family(
    "stairway",
    {"heights": "", "h0": 1, "ratio": 1, "steps": 10, "lazy": 0},
    description="stairway polygon of rectangles with heights h_k",
)
def stairway(heights: Any, h0: Number, ratio: Number, steps: int, lazy: int) -> Surface:
    """Union of the rectangles [k, k+1] x [0, h_k].

    Heights come from a comma-separated list, or h_k = h0 * ratio^k. A
    finite stairway keeps ``steps`` rectangles; ``lazy=1`` gives the
    infinite one (geometric heights only).
    """
    height, count = _heights(heights, h0, ratio)
    if lazy:
        if count is not None:
            raise ParamOutOfRange("a lazy stairway needs h0 and ratio")
        provider = StairwayProvider(height)
        return build_surface([], provider=provider, name="stairway~", window=Window(0, 4, 0, 1))
    steps = int(count if count is not None else steps)
    if steps < 1:
        raise ParamOutOfRange("stairway needs at least one step")
    provider = StairwayProvider(height, steps)
    cells: dict[CellId, Cell] = {}
    gluings: dict[tuple[EdgeRef, EdgeRef], Gluing] = {}
    tags: dict[EdgeRef, str] = {}
    for k in range(steps):
        block = provider.block(k)
        assert block is not None
        for cell in block.cells:
            cells[cell.id] = cell
        for g in block.gluings:
            gluings.setdefault((g.side_a, g.side_b), g)
        tags.update(block.tags)
    return build_surface(cells.values(), gluings.values(), tags, name="stairway")


# Origamis


@family("origami_staircase", {"rows": ""}, periodic=True, description="staircase origami")
def origami_staircase(rows: Any = "") -> Surface:
    """Rows of three unit squares, each row shifted one square left of the row below.

    Without ``rows`` this is the compact quotient by the translation (-1, 1);
    with ``rows`` it is the finite origami of that many rows.
    """
    if rows == "":
        return origami_from_polygon([(0, 0), (1, 0), (2, 0)], period=(-1, 1), name="staircase")
    count = int(rows)
    if count < 1:
        raise ParamOutOfRange("rows must be positive")
    squares = [(-k + j, k) for k in range(count) for j in range(3)]
    return origami_from_polygon(squares, name=f"staircase[{count}]")


# Plane with obstacles


def _pair(m: int, n: int) -> int:
    zm = 2 * m if m >= 0 else -2 * m - 1
    zn = 2 * n if n >= 0 else -2 * n - 1
    s = zm + zn
    return s * (s + 1) // 2 + zn


def _unpair(index: int) -> tuple[int, int]:
    s = (math.isqrt(8 * index + 1) - 1) // 2
    zn = index - s * (s + 1) // 2
    zm = s - zn

    def unzig(z: int) -> int:
        return z // 2 if z % 2 == 0 else -(z + 1) // 2

    return unzig(zm), unzig(zn)


def _empty_cell(pattern: Decomposition) -> Decomposition:
    """The unit square as one cell, its bottom and top split like ``pattern``'s."""
    cells = pattern.cell_map()
    xs: list[Number] = [cells[r.cell].edge(r.edge)[0][0] for r in pattern.bottom] + [1]
    vertices: list[Point] = [(x, 0) for x in xs]
    vertices += [(x, 1) for x in reversed(xs)]
    headings = [Angle.zero()] * (len(xs) - 1) + [Angle.exact(1, 2)]
    headings += [Angle.exact(1)] * (len(xs) - 1) + [Angle.exact(3, 2)]
    cell = Cell("e", tuple(vertices), tuple(headings))
    m = len(xs) - 1
    return Decomposition(
        [cell],
        [],
        {},
        left=[EdgeRef("e", 2 * m + 1)],
        right=[EdgeRef("e", m)],
        bottom=[EdgeRef("e", i) for i in range(m)],
        top=[EdgeRef("e", 2 * m - i) for i in range(m)],
    )


@dataclass
class PlaneProvider:
    """Unit cells (m, n) of the plane; obstacles in every cell or only in (0, 0)."""

    obstacles: list[Obstacle]
    periodic: bool = True
    _local: dict[bool, Decomposition] = field(default_factory=dict)

    def _decomposition(self, with_obstacles: bool) -> Decomposition:
        dec = self._local.get(with_obstacles)
        if dec is None:
            dec = decompose_box((0, 1, 0, 1), self.obstacles)
            if not with_obstacles:
                dec = _empty_cell(dec)
            self._local[with_obstacles] = dec
        return dec

    def _has(self, m: int, n: int) -> bool:
        return self.periodic or (m, n) == (0, 0)

    def _ref(self, ref: EdgeRef, m: int, n: int) -> EdgeRef:
        return EdgeRef(f"{ref.cell}@{m},{n}", ref.edge)

    def _cross(self, a: tuple[int, int], b: tuple[int, int], horizontal: bool) -> list[Gluing]:
        da, db = self._decomposition(self._has(*a)), self._decomposition(self._has(*b))
        cells = {**{c.id: c for c in da.cells}, **{f"~{c.id}": c for c in db.cells}}
        renamed = [EdgeRef(f"~{r.cell}", r.edge) for r in (db.left if horizontal else db.bottom)]
        pieces = da.right if horizontal else da.top
        local = glue_matching(pieces, renamed, cells, (-1, 0) if horizontal else (0, -1))
        gluings = []
        for g in local:
            other = EdgeRef(g.side_b.cell[1:], g.side_b.edge)  # type: ignore[index]
            gluings.append(
                Gluing(self._ref(g.side_a, *a), self._ref(other, *b), Isometry.identity())
            )
        return gluings

    def block(self, index: int) -> Optional[Block]:
        m, n = _unpair(index)
        dec = self._decomposition(self._has(m, n))
        shift = Isometry.translation_by(m, n)
        cells = tuple(c.transformed(shift, f"{c.id}@{m},{n}") for c in dec.cells)
        gluings = [
            Gluing(self._ref(g.side_a, m, n), self._ref(g.side_b, m, n), g.map)
            for g in dec.gluings
        ]
        gluings += self._cross((m, n), (m + 1, n), True)
        gluings += self._cross((m - 1, n), (m, n), True)
        gluings += self._cross((m, n), (m, n + 1), False)
        gluings += self._cross((m, n - 1), (m, n), False)
        tags = {self._ref(r, m, n): t for r, t in dec.tags.items()}
        return Block(cells, tuple(gluings), tags)

    def block_of(self, cell: CellId) -> Optional[int]:
        if not isinstance(cell, str) or "@" not in cell:
            return None
        try:
            m, n = (int(v) for v in cell.rsplit("@", 1)[1].split(","))
        except ValueError:
            return None
        return _pair(m, n)

    def blocks_in(self, window: Window) -> Iterable[int]:
        for m in range(math.floor(window.xmin) - 1, math.ceil(window.xmax) + 1):
            for n in range(math.floor(window.ymin) - 1, math.ceil(window.ymax) + 1):
                yield _pair(m, n)


def _polygon_vertices(text: str) -> tuple[Point, ...]:
    try:
        points = tuple(
            (parse_number(p.split(",")[0]), parse_number(p.split(",")[1]))
            for p in text.split(";")
        )
    except (ValueError, IndexError) as exc:
        raise ParamOutOfRange(f"polygon must be x,y;x,y;...: {text!r}") from exc
    if len(points) < 3:
        raise ParamOutOfRange("polygon needs three vertices")
    return points


@family(
    "plane_obstacles",
    {"polygon": "1/4,1/4;3/4,1/4;1/2,3/4", "periodic": 1},
    description="plane minus a polygon, or minus its Z^2 translates",
)
def plane_obstacles(polygon: str, periodic: int) -> Surface:
    obstacle = Obstacle(_polygon_vertices(polygon))
    provider = PlaneProvider([obstacle], bool(periodic))
    name = "plane-Z2-obstacles~" if periodic else "plane-minus-polygon~"
    return build_surface([], provider=provider, name=name, window=Window(-1.5, 1.5, -1.5, 1.5))


@family(
    "windtree",
    {"a": "1/2", "b": "1/2", "xi": "1/4", "eta": "1/4"},
    description="wind-tree model: plane minus Z^2-periodic rectangles",
)
def windtree(a: Number, b: Number, xi: Number, eta: Number) -> Surface:
    provider = PlaneProvider([_rectangle(a, b, xi, eta)], True)
    return build_surface(
        [], provider=provider, name="windtree~", window=Window(-1.5, 1.5, -1.5, 1.5)
    )


# Tower and polygons


@family(
    "tower",
    {"a": "1/2", "b": "1/4", "xi": "1/4", "eta": "1/4"},
    periodic=True,
    description="double of the rectangle band with the obstacle sides left open",
)
def tower(a: Number, b: Number, xi: Number, eta: Number) -> Surface:
    band = band_rect_obstacles(a, b, xi, eta)
    open_sides = [e for e in band.boundary_edges() if band.tag(e) == OBSTACLE]
    return double_surface(band, keep_open=open_sides)


def polygon_sides(angles: list[Angle]) -> list[float]:
    """Positive side lengths closing a polygon with the given interior angles.

    Side i has heading h_i = sum over j <= i of (pi - angle_j), h_0 = 0; the
    lengths maximize the shortest side subject to closure and a total
    perimeter of n.
    """
    n = len(angles)
    headings = [Angle.zero()]
    for k in range(1, n):
        headings.append(headings[-1] + Angle.exact(1) - angles[k])
    cos = np.array([h.cos() for h in headings])
    sin = np.array([h.sin() for h in headings])
    # variables: L_0..L_{n-1}, t ; maximize t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_eq = np.vstack([np.append(cos, 0.0), np.append(sin, 0.0), np.append(np.ones(n), 0.0)])
    b_eq = np.array([0.0, 0.0, float(n)])
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    result = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * (n + 1))
    if not result.success or result.x[-1] <= 1e-9:
        raise ParamOutOfRange("no polygon has these angles")
    return [float(v) for v in result.x[:n]]


@family(
    "polygon",
    {"angles": "3/5,3/5,3/5,3/5,3/5", "double": 0},
    description="polygon with exact interior angles (units of pi); double=1 gives its double",
)
def polygon(angles: str, double: int = 0) -> Surface:
    try:
        values = [Angle.parse(v) for v in str(angles).split(",")]
    except ValueError as exc:
        raise ParamOutOfRange(f"angles: {exc}") from exc
    n = len(values)
    if n < 3:
        raise ParamOutOfRange("a polygon has at least three angles")
    for value in values:
        if not 0 < value.to_radians() < 2 * math.pi:
            raise ParamOutOfRange(f"interior angle {value} outside (0, 2pi)")
    if abs(sum(v.to_radians() for v in values) - (n - 2) * math.pi) > 1e-9:
        raise ParamOutOfRange(f"interior angles must sum to {n - 2} pi")
    lengths = polygon_sides(values)
    headings = [Angle.zero()]
    for k in range(1, n):
        headings.append((headings[-1] + Angle.exact(1) - values[k]).normalized())
    vertices: list[Point] = [(0.0, 0.0)]
    for k in range(n - 1):
        x, y = vertices[-1]
        c, s = headings[k].unit_vector()
        vertices.append((float(x) + lengths[k] * c, float(y) + lengths[k] * s))
    cell = Cell(0, tuple(vertices), tuple(headings))
    surface = build_surface([cell], name="P")
    return double_surface(surface) if double else surface


# Quotients


def quotient_of(surface: Surface) -> Surface:
    """The compact quotient P = P~/Z, with the shift labels forgotten.

    Raises:
        NotPeriodic: The surface is compact and carries no shift labels
    """
    if surface.is_lazy:
        base = surface.metadata.get("quotient")
        if base is None:
            raise NotPeriodic(f"{surface.name or 'surface'} has no compact quotient")
    elif surface.is_periodic:
        base = surface
    else:
        raise NotPeriodic(f"{surface.name or 'surface'} is already compact")
    gluings = [Gluing(g.side_a, g.side_b, g.map) for g in base.gluings()]
    return build_surface(
        base.cells.values(),
        gluings,
        base.tags,
        name=f"{base.name}/Z",
        metadata={k: v for k, v in base.metadata.items() if k != "quotient"},
    )


def angle_parameters(name: str) -> tuple[str, ...]:
    return get_family(name).angles
