"""
Command-line entry point.

    rfcqed <subcommand> CONFIG [--out DIR]

Exit codes: 0 success, 2 failed acceptance checks, 1 any other error.
"""
import logging
import platform
from pathlib import Path
from typing import Optional

import typer

import rfcqed
from rfcqed.config import settings
from rfcqed.errors import ConfigError, ValidationFailure
from rfcqed.experiments.artifacts import library_versions
from rfcqed.experiments.runner import run
from rfcqed.experiments.schemas import load_config
from rfcqed.utils.logger import get_logger, setup_logger

setup_logger(level=settings.log_level)
logger = get_logger("rfcqed.main")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2

app = typer.Typer(
    help="Adiabatic (Born-Oppenheimer) analysis of qubits ultrastrongly coupled to a slow resonator.",
    add_completion=False,
    no_args_is_help=True,
)

CONFIG_ARGUMENT = typer.Argument(..., help="Experiment config (YAML or JSON)")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Output directory (overrides output_dir)")


def execute_config(path: Path, out: Optional[Path], kind: Optional[str]) -> int:
    """Load, check the kind matches the subcommand, run; returns the exit code."""
    try:
        config = load_config(path)
        if kind is not None and config.kind != kind:
            raise ConfigError(f"config is a '{config.kind}' experiment, not '{kind}'", key_path="kind")
        run(config, out)
    except ValidationFailure as e:
        logger.error(f"❌ {e}")
        return EXIT_VALIDATION
    except ConfigError as e:
        logger.error(f"❌ Invalid config {path}: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"❌ {type(e).__name__}: {e}", exc_info=True)
        return EXIT_ERROR
    return EXIT_OK


def _command(kind: str):
    def command(config: Path = CONFIG_ARGUMENT, out: Optional[Path] = OUT_OPTION) -> None:
        raise typer.Exit(code=execute_config(config, out, kind))

    command.__doc__ = f"Run a '{kind}' experiment."
    return command


for _kind in (
    "potentials",
    "bound_states",
    "spectrum",
    "spectrum_thermal",
    "ramsey",
    "circuit",
    "oracles",
    "validate",
    "sweep",
):
    app.command(name=_kind.replace("_", "-"))(_command(_kind))


@app.command()
def info() -> None:
    """Print the resolved settings and library versions."""
    typer.echo(f"rfcqed {rfcqed.__version__} (Python {platform.python_version()})")
    for name, version in library_versions().items():
        typer.echo(f"  {name:<10} {version}")
    typer.echo("settings:")
    for name, value in settings.model_dump().items():
        typer.echo(f"  {name:<24} {value}")


def main() -> None:
    logging.captureWarnings(True)
    app()


if __name__ == "__main__":
    main()
