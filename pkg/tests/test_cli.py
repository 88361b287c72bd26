import pytest
from typer.testing import CliRunner

from rfcqed.main import EXIT_ERROR, EXIT_OK, EXIT_VALIDATION, app, execute_config

runner = CliRunner()

POTENTIALS = {
    "kind": "potentials",
    "model": {"lambda_sq": 0.8, "mu": 100.0, "N": 2},
    "numerics": {"grid_half_width": 4.0, "grid_points": 401},
}


def test_potentials_command_is_deterministic(tmp_path, write_config):
    config = write_config(POTENTIALS)
    first, second = tmp_path / "first", tmp_path / "second"
    assert runner.invoke(app, ["potentials", str(config), "--out", str(first)]).exit_code == EXIT_OK
    assert runner.invoke(app, ["potentials", str(config), "--out", str(second)]).exit_code == EXIT_OK
    for name in ("potentials.csv", "sectors.csv", "minima.csv", "metadata.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_validate_command_with_cheap_checks(tmp_path, write_config):
    config = write_config({"kind": "validate", "validate": {"checks": ["two_qubit_origin", "properties"]}})
    result = runner.invoke(app, ["validate", str(config), "-o", str(tmp_path / "out")])
    assert result.exit_code == EXIT_OK
    assert (tmp_path / "out" / "checks.csv").exists()


def test_invalid_config_exits_with_error(tmp_path, write_config):
    config = write_config({"kind": "potentials", "model": {"mu": 100.0}})
    assert runner.invoke(app, ["potentials", str(config), "--out", str(tmp_path)]).exit_code == EXIT_ERROR


def test_kind_mismatch_is_rejected(tmp_path, write_config):
    config = write_config(POTENTIALS)
    assert execute_config(config, tmp_path, "spectrum") == EXIT_ERROR
    assert not (tmp_path / "potentials.csv").exists()


def test_failed_checks_exit_code(tmp_path, write_config, monkeypatch):
    from rfcqed.experiments.validation import CheckResult

    monkeypatch.setattr(
        "rfcqed.experiments.runner.run_checks",
        lambda names, quick: [CheckResult(name="broken", passed=False)],
    )
    config = write_config({"kind": "validate"})
    assert execute_config(config, tmp_path, "validate") == EXIT_VALIDATION


@pytest.mark.parametrize("command", ["bound-states", "spectrum-thermal", "oracles", "sweep"])
def test_subcommands_registered(command):
    result = runner.invoke(app, [command, "--help"])
    assert result.exit_code == 0


def test_info_lists_settings():
    result = runner.invoke(app, ["info"])
    assert result.exit_code == 0
    assert "numpy" in result.output
    assert "default_fock_cutoff" in result.output
