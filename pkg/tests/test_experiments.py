import json
import math

import numpy as np
import pandas as pd
import pytest

from rfcqed.adiabatic.analytics import ground_minima
from rfcqed.config import settings
from rfcqed.errors import ConfigError, ParameterError, ValidationFailure
from rfcqed.experiments.artifacts import ExperimentResult, to_jsonable, write_result
from rfcqed.experiments.runner import execute, oracle_tables, run
from rfcqed.experiments.schemas import load_config, parse_config, with_override
from rfcqed.experiments.validation import CheckResult, failed_gating, results_frame, run_checks

POTENTIALS = {
    "kind": "potentials",
    "model": {"lambda_sq": 1.5, "mu": 100.0, "N": 1},
    "numerics": {"grid_half_width": 4.0, "grid_points": 401},
}


def test_model_section_resolves_both_forms():
    physical = parse_config({"kind": "potentials", "model": {"omega_r": 0.1, "g": 0.2}}).params()
    dimensionless = parse_config({"kind": "potentials", "model": {"mu": 100.0, "lambda_sq": 0.4}}).params()
    assert physical.lambda_sq == pytest.approx(dimensionless.lambda_sq)
    assert physical.mu == pytest.approx(dimensionless.mu)


@pytest.mark.parametrize("document, key_path", [
    ({"kind": "potentials", "model": {"mu": 100.0, "lambda_sq": 0.4, "colour": 1}}, "model.colour"),
    ({"kind": "potentials", "model": {"mu": 100.0, "lambda_sq": -0.4}}, "model.lambda_sq"),
    ({"kind": "spectrum", "model": {"mu": 100.0, "lambda_sq": 0.4},
      "spectrum": {"gamma": 0.01, "omega_min": 1.0, "omega_max": 0.5}}, "spectrum"),
])
def test_config_errors_carry_key_path(document, key_path):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    assert info.value.key_path == key_path


def test_config_needs_sections_for_kind():
    with pytest.raises(ConfigError):
        parse_config({"kind": "potentials"})
    with pytest.raises(ConfigError):
        parse_config({"kind": "spectrum", "model": {"mu": 100.0, "lambda_sq": 0.4}})
    with pytest.raises(ConfigError):
        parse_config({"kind": "sweep", "sweep": {"key": "model.N", "values": [1], "experiment": "validate"}})


def test_load_config_errors(tmp_path, write_config):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("kind: [potentials\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="malformed YAML"):
        load_config(broken)
    assert load_config(write_config(POTENTIALS)).kind == "potentials"


def test_with_override_replaces_exclusive_settings():
    config = parse_config({"kind": "potentials", "model": {"omega_r": 0.1, "g": 0.2}})
    swept = with_override(config, "model.lambda_sq", 2.0)
    assert swept.model.g is None
    assert swept.params().lambda_sq == pytest.approx(2.0)
    assert config.model.g == 0.2
    with pytest.raises(ConfigError):
        with_override(config, "model.N", 0)


def test_to_jsonable():
    value = {"a": np.float64(1.5), "b": np.arange(2), "c": float("nan")}
    assert to_jsonable(value) == {"a": 1.5, "b": [0, 1], "c": None}


def test_write_result_nests_children(tmp_path):
    child = ExperimentResult("potentials", {"minima": pd.DataFrame({"X_min": [1.0]})})
    parent = ExperimentResult("sweep", {"summary": pd.DataFrame({"k": [1]})}, children={"point_000": child})
    written = write_result(parent, tmp_path)
    assert (tmp_path / "point_000" / "minima.csv").exists()
    assert len(written) == 4
    assert json.loads((tmp_path / "metadata.json").read_text())["kind"] == "sweep"


def test_potentials_run_finds_double_well(tmp_path):
    result = run(parse_config(POTENTIALS), tmp_path)
    ground = result.tables["minima"].query("branch == 0")
    assert len(ground) == 2
    _, x_min = ground_minima(math.sqrt(1.5), 1.0)
    assert sorted(ground["X_min"]) == pytest.approx([-x_min, x_min], abs=0.02)
    assert (tmp_path / "potentials.csv").exists()
    metadata = json.loads((tmp_path / "metadata.json").read_text())
    assert metadata["config"]["model"]["lambda_sq"] == 1.5
    assert "versions" in metadata


def test_potentials_several_couplings():
    document = dict(POTENTIALS, potentials={"lambda_sq_values": [0.1, 2.1]})
    result = execute(parse_config(document))
    assert {"potentials_l2_0p1", "potentials_l2_2p1", "sectors_l2_0p1"} <= set(result.tables)
    assert set(result.tables["minima"]["lambda_sq"]) == {0.1, 2.1}


def test_oracle_tables_two_qubits(two_qubits, coarse_grid):
    tables = oracle_tables(two_qubits, coarse_grid)
    assert {"sectors", "two_qubit_closed_form", "critical_couplings"} <= set(tables)
    assert "dicke_potentials" not in tables
    critical = tables["critical_couplings"].dropna()
    np.testing.assert_allclose(critical["numeric"], critical["formula"], atol=2e-3)


def test_cheap_checks_pass():
    results = run_checks(["two_qubit_origin", "stark", "properties"])
    assert all(row.passed for row in results)
    assert failed_gating(results) == []
    assert list(results_frame(results).columns)[:2] == ["name", "value"]
    with pytest.raises(ParameterError, match="unknown checks"):
        run_checks(["nonsense"])


def test_splitting_and_three_well_checks_pass():
    results = run_checks(["three_wells", "deep_splitting"])
    names = {row.name for row in results}
    assert {"three_wells_lambda_sq", "three_wells_count", "deep_splitting_slope"} <= names
    assert all(row.gating for row in results)
    assert failed_gating(results) == []


@pytest.mark.slow
def test_thermal_branch_positions():
    results = run_checks(["thermal_branches"])
    assert [row.name for row in results] == ["thermal_branch_origin", "thermal_branch_x_min"]
    assert failed_gating(results) == []


def test_quick_mode_skips_expensive_checks():
    names = [row.name for row in run_checks(["properties", "circuit"], quick=True)]
    assert names == ["parity_commutes", "spin_algebra"]


def test_failed_gating_check_raises_after_writing(tmp_path, monkeypatch):
    failing = [
        CheckResult(name="informational", passed=False, gating=False),
        CheckResult(name="broken", value=1.0, target=0.0, passed=False),
    ]
    monkeypatch.setattr("rfcqed.experiments.runner.run_checks", lambda names, quick: failing)
    with pytest.raises(ValidationFailure, match="broken"):
        run(parse_config({"kind": "validate"}), tmp_path)
    assert (tmp_path / "checks.csv").exists()


def test_sweep_writes_points_and_aggregates(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "workers", 1)
    document = dict(POTENTIALS, kind="sweep", sweep={"key": "model.lambda_sq", "values": [0.3, 1.5]})
    result = run(parse_config(document), tmp_path)
    minima = result.tables["minima"]
    assert list(minima.columns)[0] == "model.lambda_sq"
    assert len(minima.query("`model.lambda_sq` == 0.3 and branch == 0")) == 1
    assert len(minima.query("`model.lambda_sq` == 1.5 and branch == 0")) == 2
    assert (tmp_path / "point_001" / "potentials.csv").exists()
    assert len(result.tables["summary"]) == 2


def test_sweep_rejects_bad_key():
    document = dict(POTENTIALS, kind="sweep", sweep={"key": "model.N", "values": [0, 1]})
    with pytest.raises(ConfigError):
        execute(parse_config(document))
