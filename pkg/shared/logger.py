import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

from shared.config import (
    LOG_FILE,
    LOGS_DIR,
    LOG_LEVEL_ENV_VAR,
    DEFAULT_CONSOLE_LOG_LEVEL,
)

# subcommand and seed of the current run, stamped on every file record
_RUN_CONTEXT = {"run": "-"}


class RunContextFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        record.run = _RUN_CONTEXT["run"]
        return True


def set_run_context(subcommand: str, seed: int) -> None:
    """Tags later log records with the run, so a verdict can be replayed from the log."""
    _RUN_CONTEXT["run"] = f"{subcommand}:seed={seed}"


def _console_level() -> int:
    # stdout carries reports and JSON, so the console stays quiet by default
    name = os.getenv(LOG_LEVEL_ENV_VAR, DEFAULT_CONSOLE_LOG_LEVEL).upper()
    return getattr(logging, name, logging.WARNING)


def setup_logger(name: str = "strict_epi") -> logging.Logger:
    """
    Module logger: rotating file at INFO with the run context,
    stderr at STRICT_EPI_LOG_LEVEL (WARNING by default).
    """
    Path(LOGS_DIR).mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(name)
    logger.setLevel(logging.INFO)

    if logger.handlers:
        return logger

    # ----------------------------
    # File handler (rotating)
    # ----------------------------
    file_handler = RotatingFileHandler(
        LOG_FILE,
        maxBytes=5 * 1024 * 1024,  # 5 MB
        backupCount=3,
        encoding="utf-8",
    )
    file_handler.setFormatter(logging.Formatter(
        "%(asctime)s | %(levelname)s | %(run)s | %(name)s | %(message)s"
    ))
    file_handler.setLevel(logging.INFO)
    file_handler.addFilter(RunContextFilter())

    # ----------------------------
    # Console handler
    # ----------------------------
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter("%(levelname)s | %(name)s | %(message)s"))
    console_handler.setLevel(_console_level())

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    logger.propagate = False

    return logger
