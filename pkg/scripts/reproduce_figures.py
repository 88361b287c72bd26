"""
Figure reproduction pipeline.
Runs every experiment config under configs/ in order, writes each into its
own output directory and prints a one-line status per config.
Run: python scripts/reproduce_figures.py [--quick]
"""
import sys
import os
import time
from pathlib import Path
from typing import Dict, List, Tuple

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rfcqed.config import settings
from rfcqed.errors import ConfigError, ValidationFailure
from rfcqed.experiments.runner import run
from rfcqed.experiments.schemas import load_config
from rfcqed.utils.logger import get_logger, setup_logger

logger = get_logger("rfcqed.scripts.reproduce")

# Pipeline configuration
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
RESULTS_DIR = Path(settings.output_dir)
# long-running configs skipped with --quick
EXPENSIVE = {"validate.yaml", "ramsey_two_qubits.yaml", "sweep_ramsey_contrast.yaml", "circuit_reference.yaml"}


def discover_configs(quick: bool) -> List[Path]:
    paths = sorted(CONFIG_DIR.glob("*.yaml"))
    if quick:
        paths = [p for p in paths if p.name not in EXPENSIVE]
    if not paths:
        raise FileNotFoundError(f"No configs found in {CONFIG_DIR}")
    return paths


def run_one(path: Path) -> Tuple[str, float]:
    """Returns (status, seconds); status is ok, failed-checks or error."""
    start = time.time()
    try:
        config = load_config(path)
        out_dir = Path(config.output_dir) if config.output_dir else RESULTS_DIR / path.stem
        run(config, out_dir)
        status = "ok"
    except ValidationFailure as e:
        logger.warning(f"⚠️ {path.name}: {e}")
        status = "failed-checks"
    except ConfigError as e:
        logger.error(f"❌ {path.name}: invalid config: {e}")
        status = "error"
    except Exception as e:
        logger.error(f"❌ {path.name}: {type(e).__name__}: {e}", exc_info=True)
        status = "error"
    return status, time.time() - start


def main():
    """Main reproduction pipeline."""
    setup_logger(level=settings.log_level)
    quick = "--quick" in sys.argv[1:]
    logger.info("=" * 60)
    logger.info(f"🚀 Reproducing figures from {CONFIG_DIR}{' (quick)' if quick else ''}")
    logger.info("=" * 60)

    # 1. Collect configs
    paths = discover_configs(quick)
    logger.info(f"📊 {len(paths)} configs")

    # 2. Run each config
    statuses: Dict[str, Tuple[str, float]] = {}
    for path in paths:
        statuses[path.name] = run_one(path)

    # 3. Summarize
    logger.info("=" * 60)
    for name, (status, seconds) in statuses.items():
        glyph = {"ok": "✅", "failed-checks": "⚠️"}.get(status, "❌")
        logger.info(f"{glyph} {name:<36} {status:<14} {seconds:8.1f}s")
    logger.info("=" * 60)

    if any(status == "error" for status, _ in statuses.values()):
        sys.exit(1)
    if any(status == "failed-checks" for status, _ in statuses.values()):
        sys.exit(2)


if __name__ == "__main__":
    main()
