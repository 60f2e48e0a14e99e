"""Tests for SVG rendering."""

from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.flow import TangentState, trace
from polysurf.geometry import Window
from polysurf.render import render_surface_svg, render_trace_svg, trace_polyline


def test_surface_svg_is_deterministic(tmp_path, slit_torus):
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    render_surface_svg(slit_torus, first)
    render_surface_svg(slit_torus, second)
    text = first.read_text(encoding="utf-8")
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text
    assert first.read_bytes() == second.read_bytes()


def test_lazy_surface_is_drawn_in_a_window(tmp_path):
    path = tmp_path / "windtree.svg"
    render_surface_svg(make_family("windtree"), path, Window(-1, 1, -1, 1))
    assert path.stat().st_size > 0


def test_trace_svg(tmp_path, torus):
    events = trace(torus, TangentState.start(0, (0.5, 0.5), Angle.exact(1, 4)), max_length=5.0)
    segments = trace_polyline(events)
    assert len(segments) == len([e for e in events if e.length > 0])
    path = tmp_path / "orbit.svg"
    render_trace_svg(torus, events, path)
    assert "<svg" in path.read_text(encoding="utf-8")
