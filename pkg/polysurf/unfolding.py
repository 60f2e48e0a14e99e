"""Translation covers, square tilings and periodic covers."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .angles import Angle, Number, is_exact_number
from .config import get_settings
from .errors import (
    HolonomyInconsistency,
    IrrationalSurface,
    NontrivialHolonomy,
    NotLatticeDrawn,
    NotPeriodic,
    NotSquareTiled,
    UnfoldingError,
)
from .flow import TangentState, Tracer
from .geometry import (
    Block,
    Cell,
    CellId,
    Corner,
    EdgeRef,
    Gluing,
    Surface,
    Window,
    build_surface,
    corner_index_after_reflection,
    edge_index_after_reflection,
    vertex_angles,
)
from .holonomy import (
    RotationalGroup,
    developing_frames,
    edge_reflection,
    key_order,
    rotational_holonomy,
)
from .isometry import Isometry, Vec

logger = logging.getLogger(__name__)


# Covers by the rotational holonomy group


@dataclass(frozen=True)
class SheetInfo:
    base_cell: CellId
    element: Isometry  # coset representative in the holonomy group of base
    reflected: bool  # the sheet chart reverses orientation


@dataclass
class TranslationCover:
    """A cover of ``base`` by sheets indexed by cosets of a subgroup of the holonomy group of base."""

    total: Surface
    base: Surface
    sheet_map: dict[CellId, SheetInfo]
    degree: int
    group: RotationalGroup
    subgroup: RotationalGroup

    def project_edge(self, edge: EdgeRef) -> EdgeRef:
        """The base edge under a cover edge."""
        info = self.sheet_map[edge.cell]
        n = self.base.cell(info.base_cell).n
        index = edge_index_after_reflection(n, edge.edge) if info.reflected else edge.edge
        return EdgeRef(info.base_cell, index)

    def project_corner(self, corner: Corner) -> Corner:
        info = self.sheet_map[corner[0]]
        n = self.base.cell(info.base_cell).n
        index = corner_index_after_reflection(n, corner[1]) if info.reflected else corner[1]
        return (info.base_cell, index)


def _coset_rep(subgroup: RotationalGroup, sigma: Isometry) -> Isometry:
    """Canonical representative of the right coset H sigma."""
    members = [(h @ sigma).linear() for h in subgroup.elements]
    return min(members, key=lambda g: key_order(g.linear_key()))


def _sheet_id(cid: CellId, label: tuple[int, int]) -> str:
    return f"{cid}.{label[0]}.{label[1]}"


def _base_of(surface: Surface) -> Surface:
    if not surface.is_lazy:
        return surface
    quotient = surface.metadata.get("quotient")
    if quotient is None:
        raise UnfoldingError("a lazy surface needs a compact quotient to be unfolded")
    return quotient


def intermediate_cover(
    surface: Surface,
    subgroup: Optional[RotationalGroup] = None,
    group: Optional[RotationalGroup] = None,
) -> TranslationCover:
    """Quotient of the canonical translation cover by a subgroup H of the holonomy group.

    Sheets are the right cosets H sigma. The sheet over cell c is the image
    of c under sigma o D_c, D_c its developing chart. Interior gluings connect
    the sheet of sigma to the sheet of sigma h, h the loop holonomy of the
    gluing; a boundary edge connects sigma to sigma R, R its developed
    reflection, and stays boundary when both land in one coset.

    Args:
        surface: A rational surface; lazy periodic surfaces are unfolded on
            their compact quotient, with shift labels lifted to every sheet
        subgroup: H; the trivial group when None
        group: holonomy group of surface, when already known

    Returns:
        The cover; H trivial gives the canonical translation cover and
        H = the whole group gives back the surface itself
    """
    base = _base_of(surface)
    group = group if group is not None else rotational_holonomy(base)
    if not group.is_finite:
        raise IrrationalSurface(f"{base.name or 'surface'}: rotational holonomy is not finite")
    identity = Isometry.identity()
    subgroup = subgroup if subgroup is not None else RotationalGroup.from_elements([identity])
    if not all(group.contains(h) for h in subgroup.elements):
        raise HolonomyInconsistency("subgroup is not contained in the holonomy group")
    frames = developing_frames(base)

    reps: dict[tuple[object, bool], Isometry] = {}
    for sigma in group.elements:
        rep = _coset_rep(subgroup, sigma)
        reps[rep.linear_key()] = rep
    sheets = [reps[k] for k in sorted(reps, key=key_order)]

    def rep_of(g: Isometry) -> Isometry:
        return _coset_rep(subgroup, g)

    def chart(cid: CellId, sigma: Isometry) -> Isometry:
        return sigma @ frames.charts[cid]

    def cover_id(cid: CellId, sigma: Isometry) -> str:
        return _sheet_id(cid, group.index_of(sigma))

    def cover_edge(cid: CellId, edge: int, sigma: Isometry) -> EdgeRef:
        n = base.cell(cid).n
        reflected = chart(cid, sigma).reflect
        index = edge_index_after_reflection(n, edge) if reflected else edge
        return EdgeRef(cover_id(cid, sigma), index)

    cells: list[Cell] = []
    sheet_map: dict[CellId, SheetInfo] = {}
    for cid in base.cell_ids():
        for sigma in sheets:
            placement = chart(cid, sigma)
            new_id = cover_id(cid, sigma)
            cells.append(base.cell(cid).transformed(placement, new_id))
            sheet_map[new_id] = SheetInfo(cid, sigma, placement.reflect)

    gluings: dict[tuple[EdgeRef, EdgeRef], Gluing] = {}

    def add(gluing: Gluing) -> None:
        canonical = gluing.canonical()
        gluings.setdefault((canonical.side_a, canonical.side_b), canonical)

    for g in base.gluings():
        a, b = g.side_a, g.side_b
        h = frames.loop_holonomy(g).linear()
        for sigma in sheets:
            tau = rep_of(sigma @ h)
            mapping = chart(b.cell, tau) @ g.map @ chart(a.cell, sigma).inverse()
            add(
                Gluing(
                    cover_edge(a.cell, a.edge, sigma),
                    cover_edge(b.cell, b.edge, tau),
                    mapping,
                    g.shift,
                )
            )

    tags: dict[EdgeRef, str] = {}
    for edge in base.boundary_edges():
        reflection = edge_reflection(base, edge)
        d = frames.charts[edge.cell]
        developed = (d @ reflection @ d.inverse()).linear()
        for sigma in sheets:
            tau = rep_of(sigma @ developed)
            here = cover_edge(edge.cell, edge.edge, sigma)
            if tau.linear_key() == sigma.linear_key():
                tags[here] = base.tag(edge)
                continue
            mapping = chart(edge.cell, tau) @ reflection @ chart(edge.cell, sigma).inverse()
            add(Gluing(here, cover_edge(edge.cell, edge.edge, tau), mapping))

    degree = len(sheets)
    name = f"S({base.name})" if subgroup.is_trivial else f"{base.name}/H{subgroup.order}"
    total = build_surface(
        cells,
        gluings.values(),
        tags,
        name=name,
        period=base.period,
        metadata={"base": base.name},
    )
    logger.debug("%s: %d sheets, %d cells", name, degree, len(cells))
    return TranslationCover(total, base, sheet_map, degree, group, subgroup)


def canonical_translation_cover(
    surface: Surface, group: Optional[RotationalGroup] = None
) -> TranslationCover:
    """The minimal translation surface covering ``surface``; degree the order of the holonomy group.

    Raises:
        IrrationalSurface: The holonomy group is not known to be finite
        HolonomyInconsistency: The cover failed its holonomy or branching checks
    """
    cover = intermediate_cover(surface, None, group)
    check = rotational_holonomy(cover.total)
    if not check.is_trivial:
        raise HolonomyInconsistency(
            f"{cover.total.name}: cover has holonomy {check.describe()}, expected trivial"
        )
    branching_report(cover)
    return cover


@dataclass(frozen=True)
class BranchPoint:
    corner: Corner  # representative corner of the cover vertex
    base_corner: Corner
    angle: Angle
    base_angle: Angle
    ratio: int


def branching_report(cover: TranslationCover) -> list[BranchPoint]:
    """Ratio r of total angles over every cover vertex; r must be a positive integer."""
    base_classes = vertex_angles(cover.base)
    owner: dict[Corner, Corner] = {}
    for rep, vertex in base_classes.items():
        for corner in vertex.corners:
            owner[corner] = rep
    report = []
    for rep, vertex in vertex_angles(cover.total).items():
        base_rep = owner[cover.project_corner(rep)]
        base_angle = base_classes[base_rep].total_angle
        if vertex.total_angle.is_exact and base_angle.is_exact:
            assert vertex.total_angle.pi_units is not None and base_angle.pi_units is not None
            ratio = Fraction(vertex.total_angle.pi_units) / Fraction(base_angle.pi_units)
            integral = ratio.denominator == 1
            value = int(ratio) if integral else 0
        else:
            quotient = vertex.total_angle.to_radians() / base_angle.to_radians()
            value = round(quotient)
            integral = abs(quotient - value) < 1e-6
        if not integral or value < 1:
            raise HolonomyInconsistency(
                f"cover vertex at {rep} has angle {vertex.total_angle.describe()}, "
                f"not a multiple of {base_angle.describe()}"
            )
        report.append(BranchPoint(rep, base_rep, vertex.total_angle, base_angle, value))
    return report


# Square tilings


@dataclass
class SquareTiling:
    """Decomposition of a translation surface into congruent axis-parallel squares.

    ``right[k]`` and ``up[k]`` are the squares to the right of and above
    square k; ``scale`` is the number of squares per unit length along each
    axis. ``labels[k]`` gives the cell holding square k and its lattice
    position in that cell's chart.
    """

    surface: Surface
    scale: tuple[int, int]
    origin: tuple[float, float]
    labels: list[tuple[CellId, int, int]]
    right: list[int]
    up: list[int]

    def __len__(self) -> int:
        return len(self.labels)

    def rows(self) -> list[list[int]]:
        return _cycles(self.right)

    def columns(self) -> list[list[int]]:
        return _cycles(self.up)


def _cycles(permutation: list[int]) -> list[list[int]]:
    seen: set[int] = set()
    cycles = []
    for start in range(len(permutation)):
        if start in seen:
            continue
        cycle = []
        k = start
        while k not in seen:
            seen.add(k)
            cycle.append(k)
            k = permutation[k]
        cycles.append(cycle)
    return cycles


_OFFSET = (0.381966011250105, 0.618033988749895)


def _rationalize(value: Number, bound: int, tol: float) -> Optional[Fraction]:
    if is_exact_number(value):
        return Fraction(value)
    approx = Fraction(float(value)).limit_denominator(bound)
    if abs(float(approx) - float(value)) <= tol:
        return approx
    return None


def is_square_tiled(
    surface: Surface,
    bound: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> Union[SquareTiling, NotSquareTiled]:
    """Decide whether an axis scaling puts a translation surface on the integer lattice.

    Relative periods (loop translations and developed positions of
    singular vertices) must be rational with denominators within ``bound``;
    the surface is then cut into squares of side 1/sx by 1/sy.

    Returns:
        A SquareTiling, or a NotSquareTiled value saying what failed

    Raises:
        NontrivialHolonomy: The surface is not a translation surface
    """
    settings = get_settings()
    bound = bound if bound is not None else settings.lattice_bound
    tol = tolerance if tolerance is not None else settings.geom_tolerance
    surface = _base_of(surface)
    group = rotational_holonomy(surface)
    if not group.is_trivial:
        raise NontrivialHolonomy(f"{surface.name or 'surface'} has holonomy {group.describe()}")
    frames = developing_frames(surface)
    classes = vertex_angles(surface)
    singular = [v for v in classes.values() if v.is_singular]
    anchor = singular[0].corners[0] if singular else (frames.root, 0)
    origin = frames.charts[anchor[0]].apply(surface.cell(anchor[0]).vertices[anchor[1]])

    vectors: list[Vec] = [hol.translation for _, hol in frames.loops]
    for vertex in singular:
        cid, k = vertex.corners[0]
        p = frames.charts[cid].apply(surface.cell(cid).vertices[k])
        vectors.append((p[0] - origin[0], p[1] - origin[1]))
    sx = sy = 1
    for vx, vy in vectors:
        fx, fy = _rationalize(vx, bound, tol), _rationalize(vy, bound, tol)
        if fx is None or fy is None:
            return NotSquareTiled(
                f"relative period ({float(vx):.6g}, {float(vy):.6g}) is not rational within {bound}"
            )
        sx, sy = math.lcm(sx, fx.denominator), math.lcm(sy, fy.denominator)
    if sx > bound or sy > bound:
        return NotSquareTiled(f"lattice scale {sx}x{sy} exceeds bound {bound}")

    ox, oy = float(origin[0]), float(origin[1])
    labels: list[tuple[CellId, int, int]] = []
    points: dict[CellId, list[tuple[int, tuple[float, float]]]] = {}
    for cid in surface.cell_ids():
        cell = surface.cell(cid)
        chart = frames.charts[cid]
        back = chart.inverse()
        developed = cell.transformed(chart, cid)
        xmin, xmax, ymin, ymax = developed.bounding_box()
        for i in range(math.floor((xmin - ox) * sx) - 1, math.ceil((xmax - ox) * sx) + 1):
            for j in range(math.floor((ymin - oy) * sy) - 1, math.ceil((ymax - oy) * sy) + 1):
                q = (ox + (i + _OFFSET[0]) / sx, oy + (j + _OFFSET[1]) / sy)
                if developed.contains(q, tol=0.0):
                    local = back.apply(q)
                    point = (float(local[0]), float(local[1]))
                    points.setdefault(cid, []).append((len(labels), point))
                    labels.append((cid, i, j))
    expected = surface.area() * sx * sy
    if abs(len(labels) - expected) > 1e-6 * max(1.0, expected):
        return NotSquareTiled(f"found {len(labels)} squares for area {expected:g} squares")

    tracer = Tracer(surface)

    def locate(state: TangentState) -> int:
        for index, (px, py) in points.get(state.cell, []):
            if math.hypot(px - state.point[0], py - state.point[1]) <= 1e-7:
                return index
        raise UnfoldingError(f"no square representative at {state.point} in cell {state.cell!r}")

    right, up = [], []
    for index, (cid, _, _) in enumerate(labels):
        point = next(p for k, p in points[cid] if k == index)
        east = TangentState.start(cid, point, Angle.zero())
        north = TangentState.start(cid, point, Angle.exact(1, 2))
        right.append(locate(tracer.travel(east, 1.0 / sx)))
        up.append(locate(tracer.travel(north, 1.0 / sy)))
    if sorted(right) != list(range(len(labels))) or sorted(up) != list(range(len(labels))):
        raise UnfoldingError("square neighbors do not form permutations")
    return SquareTiling(surface, (sx, sy), (ox, oy), labels, right, up)


# Origamis


def unit_square(i: int, j: int) -> Cell:
    headings = (Angle.zero(), Angle.exact(1, 2), Angle.exact(1), Angle.exact(3, 2))
    return Cell(f"{i}_{j}", ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)), headings)


def origami_from_polygon(
    squares: Iterable[tuple[int, int]],
    period: Optional[tuple[int, int]] = None,
    name: str = "origami",
) -> Surface:
    """Glue the ends of every row and every column of a union of unit squares.

    Rows and columns are maximal runs of adjacent squares. With ``period``
    the polygon is the union of the translates of ``squares`` by multiples
    of it; the result is then the compact quotient, whose gluings carry the
    multiple of the period they cross as shift label.

    Raises:
        NotLatticeDrawn: Squares repeat, or a periodic row or column never ends
    """
    base = list(squares)
    if not base:
        raise NotLatticeDrawn("no squares")
    if len(set(base)) != len(base):
        raise NotLatticeDrawn("repeated square")
    members = set(base)
    if period is not None and period == (0, 0):
        raise NotLatticeDrawn("zero period")

    def locate(p: tuple[int, int]) -> Optional[tuple[tuple[int, int], int]]:
        if p in members:
            return p, 0
        if period is None:
            return None
        px, py = period
        for i, j in base:
            dx, dy = p[0] - i, p[1] - j
            k = dx // px if px else dy // py
            if (px * k, py * k) == (dx, dy):
                return (i, j), k
        return None

    def wrap(p: tuple[int, int], step: tuple[int, int]) -> tuple[tuple[int, int], int]:
        forward = (p[0] + step[0], p[1] + step[1])
        found = locate(forward)
        if found is not None:
            return found
        q = p
        for _ in range(len(base) + 1):
            back = (q[0] - step[0], q[1] - step[1])
            if locate(back) is None:
                found = locate(q)
                assert found is not None
                return found
            q = back
        raise NotLatticeDrawn(f"the run through {p} has no end")

    cells = [unit_square(i, j) for i, j in base]
    gluings = []
    for i, j in base:
        (bi, bj), k = wrap((i, j), (1, 0))
        translation = Isometry.translation_by(bi - i - 1, bj - j)
        gluings.append(Gluing(EdgeRef(f"{i}_{j}", 1), EdgeRef(f"{bi}_{bj}", 3), translation, k))
        (bi, bj), k = wrap((i, j), (0, 1))
        translation = Isometry.translation_by(bi - i, bj - j - 1)
        gluings.append(Gluing(EdgeRef(f"{i}_{j}", 2), EdgeRef(f"{bi}_{bj}", 0), translation, k))
    surface = build_surface(cells, gluings, name=name, period=period)
    logger.debug("origami %s: %d squares", name, len(cells))
    return surface


# Directions


@dataclass(frozen=True)
class DirectionClass:
    rational: bool
    slope: Optional[Fraction] = None  # None for vertical rational directions
    inexact: bool = False

    def describe(self) -> str:
        if not self.rational:
            return "Irrational" + (" (inexact input)" if self.inexact else "")
        return "Rational(inf)" if self.slope is None else f"Rational({self.slope})"


def classify_direction(
    direction: Union[Angle, Fraction, int, float],
    tiling: Optional[SquareTiling] = None,
) -> DirectionClass:
    """Rational iff the slope lies in Q or is infinite, in the tiling's square coordinates.

    ``direction`` is an angle or an exact slope. Floats cannot certify
    rationality: they classify as irrational with the inexact flag set.
    """
    if isinstance(direction, Angle):
        if not direction.is_exact:
            logger.warning("inexact direction %s classified as irrational", direction)
            return DirectionClass(False, inexact=True)
        rational, slope = direction.tan_class()
        if not rational:
            return DirectionClass(False)
    elif isinstance(direction, float):
        logger.warning("inexact slope %r classified as irrational", direction)
        return DirectionClass(False, inexact=True)
    else:
        slope = Fraction(direction)
    if slope is not None and tiling is not None:
        sx, sy = tiling.scale
        slope = slope * sy / sx
    return DirectionClass(True, slope)


# Periodic covers


@dataclass
class PeriodicProvider:
    """Blocks of a Z-cover: block k is the quotient translated by k times the period."""

    quotient: Surface
    period: Vec
    _box: tuple[float, float, float, float] = field(init=False)

    def __post_init__(self) -> None:
        boxes = [self.quotient.cell(c).bounding_box() for c in self.quotient.cell_ids()]
        self._box = (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def _shift(self, k: int) -> Isometry:
        return Isometry.translation_by(k * self.period[0], k * self.period[1])

    def block(self, index: int) -> Optional[Block]:
        cells = tuple(
            self.quotient.cell(c).transformed(self._shift(index), f"{c}@{index}")
            for c in self.quotient.cell_ids()
        )
        gluings = []
        for g in self.quotient.gluings():
            for k in {index, index - g.shift}:
                target = k + g.shift
                mapping = self._shift(target) @ g.map @ self._shift(-k)
                gluings.append(
                    Gluing(
                        EdgeRef(f"{g.side_a.cell}@{k}", g.side_a.edge),
                        EdgeRef(f"{g.side_b.cell}@{target}", g.side_b.edge),
                        mapping,
                        g.shift,
                    )
                )
        tags = {
            EdgeRef(f"{e.cell}@{index}", e.edge): self.quotient.tag(e)
            for e in self.quotient.boundary_edges()
        }
        return Block(cells, tuple(gluings), tags)

    def block_of(self, cell: CellId) -> Optional[int]:
        if not isinstance(cell, str) or "@" not in cell:
            return None
        try:
            return int(cell.rsplit("@", 1)[1])
        except ValueError:
            return None

    def blocks_in(self, window: Window) -> Iterable[int]:
        px, py = float(self.period[0]), float(self.period[1])
        length = math.hypot(px, py)
        xmin, xmax, ymin, ymax = self._box
        reach = max(abs(v) for v in (*window, xmin, xmax, ymin, ymax)) * 2
        limit = math.ceil(reach / length) + 1
        for k in range(-limit, limit + 1):
            if not (
                xmax + k * px < window.xmin
                or xmin + k * px > window.xmax
                or ymax + k * py < window.ymin
                or ymin + k * py > window.ymax
            ):
                yield k


def periodic_cover(quotient: Surface, window: Optional[Window] = None) -> Surface:
    """The noncompact Z-cover of a shift-labeled compact surface.

    Raises:
        NotPeriodic: The quotient has no shift labels or no period vector
    """
    if not quotient.is_periodic:
        raise NotPeriodic(f"{quotient.name or 'surface'} has no shift-labeled gluings")
    if quotient.period is None:
        raise NotPeriodic(f"{quotient.name or 'surface'} has no period vector")
    provider = PeriodicProvider(quotient, quotient.period)
    return build_surface(
        [],
        provider=provider,
        name=f"{quotient.name}~",
        period=quotient.period,
        window=window,
        metadata={"quotient": quotient},
    )
