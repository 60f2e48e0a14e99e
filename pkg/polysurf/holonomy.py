"""Developing maps and the rotational holonomy group of a surface."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .angles import Angle
from .config import get_settings
from .errors import HolonomyInconsistency, InfiniteGroup, IrrationalSurface
from .geometry import WINDOW_TAG, CellId, EdgeRef, Gluing, Surface, Window
from .isometry import Isometry

logger = logging.getLogger(__name__)

FINITE = "finite"
EXCEEDS_CAP = "exceeds_cap"


@dataclass
class Frames:
    """Developing charts of a finite surface over a spanning tree of its gluing graph.

    ``charts[c]`` maps the coordinates of cell c into the coordinates of the
    root cell. ``loops`` holds one holonomy per gluing outside the tree and
    ``reflections`` the developed reflection of every boundary edge.
    """

    root: CellId
    charts: dict[CellId, Isometry]
    tree: set[tuple[EdgeRef, EdgeRef]] = field(default_factory=set)
    loops: list[tuple[Gluing, Isometry]] = field(default_factory=list)
    reflections: list[tuple[EdgeRef, Isometry]] = field(default_factory=list)

    def loop_holonomy(self, gluing: Gluing) -> Isometry:
        """D_a o g^-1 o D_b^-1 for the gluing g from a to b."""
        d_a = self.charts[gluing.side_a.cell]
        d_b = self.charts[gluing.side_b.cell]
        return d_a @ gluing.map.inverse() @ d_b.inverse()


def edge_reflection(surface: Surface, edge: EdgeRef) -> Isometry:
    """Reflection in the line of ``edge``, in its cell's chart."""
    cell = surface.cell(edge.cell)
    start, _ = cell.edge(edge.edge)
    heading = cell.heading(edge.edge)
    return Isometry.reflection_in_line(
        start, cell.edge_vector(edge.edge), heading if heading.is_exact else None
    )


def developing_frames(surface: Surface, window: Optional[Window] = None) -> Frames:
    """Develop every cell into the root chart by breadth-first search.

    Args:
        surface: A finite surface, or a lazy one restricted to ``window``
        window: Window used for lazy surfaces

    Returns:
        Frames with charts, loop holonomies and boundary reflections
    """
    if surface.is_lazy:
        surface = surface.restrict(window or Window.square(3.0))
    ids = surface.cell_ids()
    root = ids[0]
    charts: dict[CellId, Isometry] = {root: Isometry.identity()}
    frames = Frames(root=root, charts=charts)
    queue = deque([root])
    while queue:
        cid = queue.popleft()
        for i in range(surface.cell(cid).n):
            gluing = surface.partner(EdgeRef(cid, i))
            if gluing is None:
                continue
            other = gluing.side_b.cell
            if other not in charts:
                charts[other] = charts[cid] @ gluing.map.inverse()
                frames.tree.add((gluing.side_a, gluing.side_b))
                frames.tree.add((gluing.side_b, gluing.side_a))
                queue.append(other)
    for gluing in surface.gluings():
        if (gluing.side_a, gluing.side_b) not in frames.tree:
            frames.loops.append((gluing, frames.loop_holonomy(gluing)))
    for edge in surface.boundary_edges():
        if surface.tag(edge) == WINDOW_TAG:
            continue
        d = charts[edge.cell]
        frames.reflections.append((edge, d @ edge_reflection(surface, edge) @ d.inverse()))
    return frames


@dataclass(frozen=True)
class RotationalGroup:
    """The group of linear parts of holonomy.

    A finite group is cyclic of order ``n`` or dihedral of order ``2n``.
    When the closure was not attempted or did not finish the status is
    ``exceeds_cap`` and ``elements`` is empty.
    """

    status: str
    elements: tuple[Isometry, ...] = ()
    n: Optional[int] = None
    has_reflection: bool = False
    cap: int = 0
    generators: tuple[Isometry, ...] = ()

    @classmethod
    def from_elements(
        cls, elements: list[Isometry], generators: tuple[Isometry, ...] = (), cap: int = 0
    ) -> RotationalGroup:
        unique = {g.linear_key(): g.linear() for g in elements}
        ordered = tuple(unique[k] for k in sorted(unique, key=key_order))
        reflections = sum(1 for g in ordered if g.reflect)
        n = len(ordered) - reflections
        return cls(
            status=FINITE,
            elements=ordered,
            n=n,
            has_reflection=reflections > 0,
            cap=cap,
            generators=generators,
        )

    @property
    def is_finite(self) -> bool:
        return self.status == FINITE

    @property
    def order(self) -> Optional[int]:
        return len(self.elements) if self.is_finite else None

    @property
    def is_trivial(self) -> bool:
        return self.is_finite and len(self.elements) == 1

    @property
    def rotations(self) -> list[Isometry]:
        return [g for g in self.elements if not g.reflect]

    @property
    def reflections(self) -> list[Isometry]:
        return [g for g in self.elements if g.reflect]

    def keys(self) -> set[tuple[object, bool]]:
        return {g.linear_key() for g in self.elements}

    def contains(self, g: Isometry) -> bool:
        return g.linear_key() in self.keys()

    def element(self, key: tuple[object, bool]) -> Isometry:
        for g in self.elements:
            if g.linear_key() == key:
                return g
        raise KeyError(key)

    def index_of(self, g: Isometry) -> tuple[int, int]:
        """Stable label (k, s) of an element: rotation index k and reflect bit s."""
        if self.n is None or not self.is_finite:
            raise InfiniteGroup("labels exist only for finite groups")
        rotation = g.rotation.pi_units
        if rotation is None:
            raise InfiniteGroup("labels need exact rotations")
        if g.reflect:
            base = min(
                r.rotation.pi_units for r in self.reflections if r.rotation.pi_units is not None
            )
            rotation = rotation - base
        k = (rotation * self.n / 2) % self.n
        if k.denominator != 1:
            raise HolonomyInconsistency(f"{g.describe()} is not an element of the group")
        return int(k), int(g.reflect)

    def describe(self) -> str:
        if not self.is_finite:
            return f"exceeds cap {self.cap}"
        if self.is_trivial:
            return "trivial"
        return f"D_{self.n}" if self.has_reflection else f"C_{self.n}"


def key_order(key: tuple[object, bool]) -> tuple[int, float, str]:
    value, reflect = key
    if isinstance(value, Fraction):
        return (int(reflect), float(value), str(value))
    return (int(reflect), float(value), "")  # type: ignore[arg-type]


def predicted_order(generators: list[Isometry]) -> tuple[int, bool]:
    """Rotation count N and reflection flag of the group generated by exact linear parts.

    The rotation subgroup is generated by the rotations and by the
    differences of reflection angles; a rotation by x*pi has order equal to
    the denominator of x/2.
    """
    reflections = [g.rotation.pi_units for g in generators if g.reflect]
    values = [g.rotation.pi_units for g in generators if not g.reflect]
    if reflections:
        first = reflections[0]
        values.extend(r - first for r in reflections[1:] if r is not None and first is not None)
    n = 1
    for value in values:
        assert value is not None
        n = math.lcm(n, (Fraction(value) / 2 % 1).denominator)
    return n, bool(reflections)


def _close(generators: list[Isometry], cap: int) -> list[Isometry]:
    identity = Isometry.identity()
    found = {identity.linear_key(): identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for h in generators:
                product = (h @ g).linear()
                key = product.linear_key()
                if key not in found:
                    found[key] = product
                    nxt.append(product)
                    if len(found) > cap:
                        return list(found.values())
        frontier = nxt
    return list(found.values())


def holonomy_generators(surface: Surface, window: Optional[Window] = None) -> list[Isometry]:
    """Linear parts of loop holonomies and developed boundary reflections, deduplicated."""
    frames = developing_frames(surface, window)
    generators: dict[tuple[object, bool], Isometry] = {}
    for _, hol in frames.loops:
        linear = hol.linear()
        if not linear.is_linear_identity():
            generators.setdefault(linear.linear_key(), linear)
    for _, reflection in frames.reflections:
        linear = reflection.linear()
        generators.setdefault(linear.linear_key(), linear)
    return [generators[k] for k in sorted(generators, key=key_order)]


def rotational_holonomy(
    surface: Surface,
    cap: Optional[int] = None,
    window: Optional[Window] = None,
) -> RotationalGroup:
    """Compute the rotational holonomy group of a surface.

    Args:
        surface: A validated surface (lazy surfaces are restricted to ``window``)
        cap: Largest group order to enumerate; defaults to settings
        window: Generating window for lazy surfaces

    Returns:
        A finite RotationalGroup, or one with status ``exceeds_cap``

    Exact generators whose predicted order is above ``cap`` give an
    ``exceeds_cap`` group and a warning, never an exception; callers test
    ``is_finite``. HolonomyInconsistency is kept for exact generators whose
    closure disagrees with the predicted order.
    """
    cap = cap if cap is not None else get_settings().holonomy_cap
    generators = holonomy_generators(surface, window)
    if any(not g.rotation.is_exact for g in generators):
        logger.warning(
            "%s: inexact holonomy generators, finiteness undecided", surface.name or "surface"
        )
        return RotationalGroup(status=EXCEEDS_CAP, cap=cap, generators=tuple(generators))
    n, reflect = predicted_order(generators)
    expected = n * (2 if reflect else 1)
    if expected > cap:
        logger.warning(
            "%s: holonomy group of order %d exceeds cap %d",
            surface.name or "surface",
            expected,
            cap,
        )
        return RotationalGroup(status=EXCEEDS_CAP, cap=cap, generators=tuple(generators))
    elements = _close(generators, cap)
    if len(elements) != expected:
        raise HolonomyInconsistency(
            f"exact generators closed to {len(elements)} elements, expected {expected}"
        )
    group = RotationalGroup.from_elements(elements, tuple(generators), cap)
    logger.debug("%s: holonomy %s", surface.name or "surface", group.describe())
    return group


def n_of_surface(target: Union[Surface, RotationalGroup]) -> int:
    """N with holonomy group D_N (or C_N for surfaces without reflections)."""
    group = target if isinstance(target, RotationalGroup) else rotational_holonomy(target)
    if not group.is_finite or group.n is None:
        raise IrrationalSurface("rotational holonomy is not known to be finite")
    return group.n


def rotation_element(n: int, k: int) -> Isometry:
    return Isometry(rotation=Angle.exact(2 * k, n))


def subgroups(group: RotationalGroup) -> list[RotationalGroup]:
    """Every subgroup of a finite cyclic or dihedral group.

    Cyclic subgroups are generated by r^d for d dividing N; dihedral ones by
    r^d together with one reflection r^i s, 0 <= i < d.
    """
    if not group.is_finite or group.n is None:
        raise InfiniteGroup("subgroups of a group that is not known to be finite")
    n = group.n
    divisors = [d for d in range(1, n + 1) if n % d == 0]
    found: dict[frozenset[tuple[object, bool]], RotationalGroup] = {}
    for d in divisors:
        rotations = [rotation_element(n, k) for k in range(0, n, d)]
        cyclic = RotationalGroup.from_elements(rotations)
        found.setdefault(frozenset(cyclic.keys()), cyclic)
        if not group.has_reflection:
            continue
        base = min(group.reflections, key=lambda g: key_order(g.linear_key()))
        for i in range(d):
            reflection = rotation_element(n, i) @ base
            members = rotations + [r @ reflection for r in rotations]
            dihedral = RotationalGroup.from_elements(members)
            found.setdefault(frozenset(dihedral.keys()), dihedral)
    return sorted(
        found.values(),
        key=lambda g: (len(g.elements), sorted(key_order(k) for k in g.keys())),
    )


def generated_subgroup(group: RotationalGroup, generators: list[Isometry]) -> RotationalGroup:
    """Smallest subgroup of ``group`` containing ``generators``."""
    elements = _close([g.linear() for g in generators], max(len(group.elements), 1))
    return RotationalGroup.from_elements(elements)
