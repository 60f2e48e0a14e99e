"""Tests for the surface description format."""

from fractions import Fraction

import pytest

from polysurf.catalog import make_family
from polysurf.errors import MapMismatch, PolysurfError, SurfaceFormatError, UnknownEdge
from polysurf.geometry import EdgeRef
from polysurf.surface_io import HEADER, format_surface, parse_surface, read_surface, write_surface

TORUS = """\
# polysurf surface v1
surface T
cell 0 0,0 1,0 1,1 0,1 headings 0 1/2 1 3/2
glue 0:1 0:3 t=-1,0   # right to left
glue 0:2 0:0 t=0,-1 shift=1
"""


class TestParse:
    def test_torus(self):
        surface = parse_surface(TORUS)
        assert surface.name == "T"
        assert surface.cell_ids() == [0]
        assert surface.boundary_edges() == []
        assert surface.is_periodic
        assert surface.partner(EdgeRef(0, 2)).shift == 1

    def test_rational_vertices_stay_exact(self):
        surface = parse_surface("cell a 0,0 1/3,0 0,1/3\n")
        assert surface.cell("a").vertices[1] == (Fraction(1, 3), 0)
        assert surface.boundary_edges() == [EdgeRef("a", 0), EdgeRef("a", 1), EdgeRef("a", 2)]

    def test_tags(self):
        surface = parse_surface("cell 0 0,0 1,0 0,1\ntag 0:0 barrier\n")
        assert surface.tag(EdgeRef(0, 0)) == "barrier"
        assert surface.tag(EdgeRef(0, 1)) == "boundary"

    @pytest.mark.parametrize(
        "text, line",
        [
            ("cell 0 0,0 1,0\n", 1),
            ("\n# comment\nblob 1 2\n", 3),
            ("cell 0 0,0 1,0 x,1\n", 1),
            ("cell 0 0,0 1,0 0,1 headings 0 1/2\n", 1),
            ("cell 0 0,0 1,0 0,1\nglue 0:0 0:1 spin=2\n", 2),
            ("cell 0 0,0 1,0 0,1\ntag 0 wall\n", 2),
            ("period 1\n", 1),
        ],
    )
    def test_malformed_records_name_their_line(self, text, line):
        with pytest.raises(SurfaceFormatError) as info:
            parse_surface(text)
        assert info.value.line == line
        assert info.value.message.startswith(f"line {line}:")

    def test_no_cells(self):
        with pytest.raises(SurfaceFormatError, match="no cells"):
            parse_surface("# nothing here\n")

    def test_invalid_gluing_is_a_geometry_error(self):
        with pytest.raises(MapMismatch):
            parse_surface(TORUS.replace("t=-1,0", "t=-2,0"))

    def test_missing_edge(self):
        with pytest.raises(UnknownEdge):
            parse_surface("cell 0 0,0 1,0 0,1\nglue 0:0 0:9\n")


class TestFormat:
    def test_header_and_records(self, slit_torus):
        text = format_surface(slit_torus)
        assert text.startswith(HEADER + "\n")
        assert "tag " in text
        assert "barrier" in text

    def test_formatting_is_stable(self, rect_band):
        text = format_surface(rect_band)
        assert format_surface(parse_surface(text)) == text
        assert "shift=1" in text
        assert "period 1 0" in text

    def test_lazy_surfaces_are_refused(self):
        with pytest.raises(PolysurfError):
            format_surface(make_family("windtree"))


def test_files(tmp_path, torus):
    path = tmp_path / "torus.polysurf"
    write_surface(torus, path)
    surface = read_surface(path)
    assert surface.name == torus.name
    assert len(surface.gluings()) == 2

    nameless = tmp_path / "square.polysurf"
    nameless.write_text("cell 0 0,0 1,0 1,1 0,1\n", encoding="utf-8")
    assert read_surface(nameless).name == "square"
