"""Shared fixtures."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """Config with colour off and the sweep cache inside tmp_path."""
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "state_db_path": str(tmp_path / "state" / "sweeps.db"),
                "enable_color": False,
                "log_level": "ERROR",
            }
        )
    )
    return path


@pytest.fixture
def write_grid(tmp_path: Path):
    """Write a grid dict to a JSON file and return its path."""

    def _write(data, name: str = "grid.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path

    return _write
