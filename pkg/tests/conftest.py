"""Shared fixtures for the polysurf test suite."""

import pytest

from polysurf import config
from polysurf.angles import Angle
from polysurf.catalog import make_family
from polysurf.geometry import Cell, build_surface

SQUARE_HEADINGS = (Angle.zero(), Angle.exact(1, 2), Angle.exact(1), Angle.exact(3, 2))


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Run every test in an empty directory with fresh settings."""
    monkeypatch.chdir(tmp_path)
    for name in list(config.Settings.model_fields):
        monkeypatch.delenv(f"POLYSURF_{name.upper()}", raising=False)
    config._settings = None
    yield
    config._settings = None


@pytest.fixture
def square_table():
    """The unit square with no gluings: a billiard table."""
    cell = Cell(0, ((0, 0), (1, 0), (1, 1), (0, 1)), SQUARE_HEADINGS)
    return build_surface([cell], name="square")


@pytest.fixture
def torus():
    return make_family("torus")


@pytest.fixture
def slit_torus():
    return make_family("torus_barrier", l="1/2", eta="0")


@pytest.fixture
def rect_band():
    return make_family("band_rect_obstacles")


@pytest.fixture
def horizontal_band():
    return make_family("band_horizontal_barriers")
