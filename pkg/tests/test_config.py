"""Tests for settings loading and overrides."""

import json

import pytest
from pydantic import ValidationError

from polysurf import config
from polysurf.config import CONFIG_FILENAME, Settings, get_settings, override_settings


def test_defaults():
    settings = get_settings()
    assert settings.geom_tolerance == 1e-9
    assert settings.holonomy_cap == 4096
    assert settings.workers == 1
    assert settings.escape_window == 100


def test_environment(monkeypatch):
    monkeypatch.setenv("POLYSURF_HOLONOMY_CAP", "16")
    assert get_settings().holonomy_cap == 16


def test_save_writes_only_changes(tmp_path):
    Settings(seed=7).save()
    data = json.loads((tmp_path / CONFIG_FILENAME).read_text())
    assert data == {"seed": 7}
    assert config.reload_settings().seed == 7


def test_dotenv(tmp_path):
    (tmp_path / ".env").write_text("POLYSURF_MAX_EVENTS=50\n")
    assert Settings.load().max_events == 50


def test_override_ignores_none():
    override_settings(seed=3, workers=None)
    assert get_settings().seed == 3
    assert get_settings().workers == 1


def test_validation():
    with pytest.raises(ValidationError):
        Settings(geom_tolerance=0)
