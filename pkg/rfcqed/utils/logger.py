"""
Console logging for rfcqed.
All module loggers are children of the "rfcqed" logger configured here.
"""
import logging
import sys
from typing import Union


ROOT_LOGGER = "rfcqed"


class ColoredFormatter(logging.Formatter):
    """Formatter that colors the level name."""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record):
        levelname = record.levelname
        if levelname in self.COLORS:
            record.levelname = f"{self.COLORS[levelname]}{levelname}{self.COLORS['RESET']}"

        formatted = super().format(record)

        # Restore for other handlers
        record.levelname = levelname

        return formatted


def _as_level(level: Union[int, str]) -> int:
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logger(name: str = ROOT_LOGGER, level: Union[int, str] = logging.INFO) -> logging.Logger:
    """Attach a colored stdout handler to `name` (once) and set its level."""
    logger = logging.getLogger(name)
    logger.setLevel(_as_level(level))

    # Avoid duplicate handlers on repeated setup
    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(_as_level(level))
        return logger

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(_as_level(level))
    console_handler.setFormatter(ColoredFormatter(
        fmt='%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))
    logger.addHandler(console_handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """Get a logger; names outside the package tree are re-rooted under it."""
    if name != ROOT_LOGGER and not name.startswith(ROOT_LOGGER + "."):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)


def log_banner(logger: logging.Logger, title: str) -> None:
    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)
