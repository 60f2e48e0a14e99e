"""SVG pictures of fundamental domains and trajectories."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.axes import Axes  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .flow import EventKind, TraceEvent  # noqa: E402
from .geometry import WINDOW_TAG, Surface, Window  # noqa: E402

logger = logging.getLogger(__name__)

# stroke style per boundary tag: (color, width, dashes)
STYLES = {
    "wall": ("#222222", 1.6, "solid"),
    "boundary": ("#222222", 1.6, "solid"),
    "barrier": ("#c0392b", 2.2, "solid"),
    "obstacle": ("#c0392b", 2.2, "solid"),
    WINDOW_TAG: ("#999999", 0.8, "dashed"),
}
_DEFAULT_STYLE = ("#8e44ad", 1.6, "solid")


def _figure(surface: Surface, window: Optional[Window]) -> tuple[Figure, Axes]:
    if surface.is_lazy:
        surface = surface.restrict(window or Window.square(2.0))
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot(1, 1, 1)
    polygons = [surface.cell(cid).float_vertices() for cid in surface.cell_ids()]
    ax.add_collection(
        PolyCollection(polygons, facecolors="#f4f1ea", edgecolors="#cccccc", linewidths=0.5)
    )
    by_tag: dict[str, list[tuple[tuple[float, float], tuple[float, float]]]] = {}
    for edge in surface.boundary_edges():
        start, end = surface.cell(edge.cell).edge(edge.edge)
        segment = ((float(start[0]), float(start[1])), (float(end[0]), float(end[1])))
        by_tag.setdefault(surface.tag(edge), []).append(segment)
    for tag in sorted(by_tag):
        color, width, style = STYLES.get(tag, _DEFAULT_STYLE)
        ax.add_collection(
            LineCollection(by_tag[tag], colors=color, linewidths=width, linestyles=style)
        )
    xs = [x for poly in polygons for x, _ in poly]
    ys = [y for poly in polygons for _, y in poly]
    if xs:
        pad = 0.03 * max(max(xs) - min(xs), max(ys) - min(ys), 1e-9)
        ax.set_xlim(min(xs) - pad, max(xs) + pad)
        ax.set_ylim(min(ys) - pad, max(ys) + pad)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title(surface.name or "surface", fontsize=9)
    return fig, ax


def _save(fig: Figure, path: Union[str, Path]) -> None:
    # fixed hash salt and no date keep the SVG byte-identical between runs
    with rc_context({"svg.hashsalt": "polysurf", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("wrote %s", path)


def render_surface_svg(
    surface: Surface, path: Union[str, Path], window: Optional[Window] = None
) -> None:
    """Draw the cells, with boundary edges styled by their tag."""
    fig, _ = _figure(surface, window)
    _save(fig, path)


def trace_polyline(events: Iterable[TraceEvent]) -> list[tuple[tuple[float, float], ...]]:
    """Event segments in the charts of their cells, i.e. in the fundamental domain."""
    return [tuple(event.segment) for event in events if event.length > 0]


def render_trace_svg(
    surface: Surface,
    events: Sequence[TraceEvent],
    path: Union[str, Path],
    window: Optional[Window] = None,
) -> None:
    """Draw the fundamental domain with the trajectory folded into it."""
    fig, ax = _figure(surface, window)
    segments = trace_polyline(events)
    ax.add_collection(LineCollection(segments, colors="#1f6fb2", linewidths=0.7))
    hits = [e.segment[1] for e in events if e.kind == EventKind.SINGULAR_HIT]
    if hits:
        ax.scatter([p[0] for p in hits], [p[1] for p in hits], s=12, color="#c0392b", zorder=3)
    if segments:
        x, y = segments[0][0]
        ax.scatter([x], [y], s=10, color="#1f6fb2", zorder=3)
    _save(fig, path)
