"""Surface description text format.

One record per line; ``#`` starts a comment::

    surface <name>
    period <x> <y>
    cell <id> <x>,<y> <x>,<y> ... [headings <angle> ...]
    glue <cell>:<edge> <cell>:<edge> rot=<angle> refl=<0|1> t=<x>,<y> [cs=<c>,<s>] [shift=<k>]
    tag <cell>:<edge> <label>

Numbers are integers, "p/q" rationals or floats; angles are "p/q" in units
of pi or "rad:FLOAT". Cell ids that are plain integers are read back as ints.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

from .angles import Angle, Number, format_number, is_exact_number, parse_number
from .errors import PolysurfError, SurfaceFormatError
from .geometry import Cell, CellId, EdgeRef, Gluing, Point, Surface, build_surface, sort_key
from .isometry import Isometry

logger = logging.getLogger(__name__)

HEADER = "# polysurf surface v1"


def _cell_id(text: str) -> CellId:
    if text.lstrip("-").isdigit():
        return int(text)
    return text


def _edge(text: str, line: int) -> EdgeRef:
    cell, sep, edge = text.rpartition(":")
    if not sep or not edge.isdigit():
        raise SurfaceFormatError(f"bad edge reference {text!r}", line)
    return EdgeRef(_cell_id(cell), int(edge))


def _number(text: str, line: int) -> Number:
    try:
        return parse_number(text)
    except ValueError as exc:
        raise SurfaceFormatError(str(exc), line) from exc


def _pair(text: str, line: int) -> Point:
    parts = text.split(",")
    if len(parts) != 2:
        raise SurfaceFormatError(f"expected x,y, got {text!r}", line)
    return _number(parts[0], line), _number(parts[1], line)


def _angle(text: str, line: int) -> Angle:
    try:
        return Angle.parse(text)
    except ValueError as exc:
        raise SurfaceFormatError(str(exc), line) from exc


def _format_pair(pair: tuple[Number, Number]) -> str:
    return f"{format_number(pair[0])},{format_number(pair[1])}"


def parse_surface(text: str, tolerance: Optional[float] = None) -> Surface:
    """Parse and validate a surface description.

    Raises:
        SurfaceFormatError: Malformed record, with its line number
        GeometryError: The described complex is invalid
    """
    name = ""
    period: Optional[Point] = None
    cells: list[Cell] = []
    gluings: list[Gluing] = []
    tags: dict[EdgeRef, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *fields = line.split()
        if keyword == "surface":
            name = " ".join(fields)
        elif keyword == "period":
            if len(fields) != 2:
                raise SurfaceFormatError("period needs two numbers", number)
            period = (_number(fields[0], number), _number(fields[1], number))
        elif keyword == "cell":
            cells.append(_parse_cell(fields, number))
        elif keyword == "glue":
            gluings.append(_parse_gluing(fields, number))
        elif keyword == "tag":
            if len(fields) != 2:
                raise SurfaceFormatError("tag needs an edge and a label", number)
            tags[_edge(fields[0], number)] = fields[1]
        else:
            raise SurfaceFormatError(f"unknown record {keyword!r}", number)
    if not cells:
        raise SurfaceFormatError("no cells", 0)
    try:
        return build_surface(cells, gluings, tags, name=name, period=period, tolerance=tolerance)
    except SurfaceFormatError:
        raise
    except PolysurfError as exc:
        logger.debug("invalid surface description: %s", exc)
        raise


def _parse_cell(fields: list[str], line: int) -> Cell:
    if len(fields) < 4:
        raise SurfaceFormatError("a cell needs an id and at least three vertices", line)
    cid = _cell_id(fields[0])
    rest = fields[1:]
    headings: Optional[tuple[Angle, ...]] = None
    if "headings" in rest:
        split = rest.index("headings")
        headings = tuple(_angle(h, line) for h in rest[split + 1 :])
        rest = rest[:split]
    vertices = tuple(_pair(v, line) for v in rest)
    if headings is not None and len(headings) != len(vertices):
        raise SurfaceFormatError(
            f"cell {cid}: {len(vertices)} vertices but {len(headings)} headings", line
        )
    return Cell(cid, vertices, headings)


def _parse_gluing(fields: list[str], line: int) -> Gluing:
    if len(fields) < 2:
        raise SurfaceFormatError("a gluing needs two edges", line)
    side_a, side_b = _edge(fields[0], line), _edge(fields[1], line)
    options: dict[str, str] = {}
    for item in fields[2:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise SurfaceFormatError(f"expected key=value, got {item!r}", line)
        options[key] = value
    unknown = set(options) - {"rot", "refl", "t", "cs", "shift"}
    if unknown:
        raise SurfaceFormatError(f"unknown gluing fields {sorted(unknown)}", line)
    rotation = _angle(options.get("rot", "0"), line)
    reflect = options.get("refl", "0") not in ("0", "false")
    translation = _pair(options.get("t", "0,0"), line)
    cos_sin = _pair(options["cs"], line) if "cs" in options else None
    try:
        shift = int(options.get("shift", "0"))
    except ValueError as exc:
        raise SurfaceFormatError(f"bad shift {options['shift']!r}", line) from exc
    return Gluing(side_a, side_b, Isometry(rotation, reflect, translation, cos_sin), shift)


def format_surface(surface: Surface) -> str:
    """Serialize a finite surface; exact coordinates are written as "p/q"."""
    if surface.is_lazy:
        raise PolysurfError("lazy surfaces have no finite description; restrict to a window first")
    lines = [HEADER]
    if surface.name:
        lines.append(f"surface {surface.name}")
    if surface.period is not None:
        px, py = surface.period
        lines.append(f"period {format_number(px)} {format_number(py)}")
    for cid in surface.cell_ids():
        cell = surface.cell(cid)
        record = ["cell", str(cid), *(_format_pair(v) for v in cell.vertices)]
        if cell.headings is not None:
            record += ["headings", *(str(h) for h in cell.headings)]
        lines.append(" ".join(record))
    for g in surface.gluings():
        record = [
            "glue",
            str(g.side_a),
            str(g.side_b),
            f"rot={g.map.rotation}",
            f"refl={int(g.map.reflect)}",
            f"t={_format_pair(g.map.translation)}",
        ]
        cs = g.map.cos_sin
        if (
            cs is not None
            and is_exact_number(cs[0])
            and is_exact_number(cs[1])
            and g.map.rotation.exact_cos_sin() is None
        ):
            record.append(f"cs={_format_pair(cs)}")
        if g.shift:
            record.append(f"shift={g.shift}")
        lines.append(" ".join(record))
    for edge in sorted(surface.tags, key=lambda e: (sort_key(e.cell), e.edge)):
        lines.append(f"tag {edge} {surface.tags[edge]}")
    return "\n".join(lines) + "\n"


def read_surface(path: Union[str, Path], tolerance: Optional[float] = None) -> Surface:
    text = Path(path).read_text(encoding="utf-8")
    surface = parse_surface(text, tolerance)
    if not surface.name:
        surface.name = Path(path).stem
    return surface


def write_surface(surface: Surface, path: Union[str, Path]) -> None:
    Path(path).write_text(format_surface(surface), encoding="utf-8")
    logger.info("wrote %s to %s", surface.name or "surface", path)
