"""Shared fixtures: cheap parameter sets and grids."""
from pathlib import Path

import pytest
import yaml

from rfcqed.adiabatic.born_oppenheimer import XGrid
from rfcqed.quantum.models import ModelParams


@pytest.fixture
def two_qubits() -> ModelParams:
    return ModelParams.from_dimensionless(0.5, 100.0, N=2)


@pytest.fixture
def coarse_grid() -> XGrid:
    return XGrid.symmetric(6.0, 601)


@pytest.fixture
def write_config(tmp_path: Path):
    """Dump a config mapping to YAML and return its path."""

    def _write(document: dict, name: str = "config.yaml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(document), encoding="utf-8")
        return path

    return _write
