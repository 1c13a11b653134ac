"""
DelaySSM — Structured Logging.
Console and rotating-file logging for the `src` logger hierarchy. Every record
carries the active subcommand and run name; `extra={"props": {...}}` fields are
flattened into the JSON document (or appended as key=value in plain text).
"""

import logging
import logging.handlers
import sys
from pathlib import Path

try:
    from pythonjsonlogger import json as jsonlogger
except ImportError:
    jsonlogger = None

PACKAGE_LOGGER = "src"

# numerics libraries log nothing useful at INFO
QUIET_LOGGERS = ("numpy", "scipy", "matplotlib", "PIL")

_run = {"command": "-", "run": "-"}


def bind_run(command: str, run_name: str) -> None:
    """Tag all subsequent records with the subcommand and the run config name."""
    _run.update(command=command, run=run_name)


class RunContextFilter(logging.Filter):
    """Inject `command` and `run` into every record, and a `props` dict if absent."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = _run["command"]
        record.run = _run["run"]
        if not isinstance(getattr(record, "props", None), dict):
            record.props = {}
        return True


if jsonlogger is not None:

    class RunJsonFormatter(jsonlogger.JsonFormatter):
        def add_fields(self, log_record: dict, record: logging.LogRecord, message_dict: dict) -> None:
            super().add_fields(log_record, record, message_dict)
            props = log_record.pop("props", None) or {}
            for key, value in props.items():
                log_record.setdefault(key, value)

else:
    RunJsonFormatter = None


class PlainRunFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        props = getattr(record, "props", None)
        if props:
            line += " │ " + " ".join(f"{k}={v}" for k, v in props.items())
        return line


def _make_formatter(json_format: bool) -> logging.Formatter:
    if json_format and RunJsonFormatter is not None:
        return RunJsonFormatter(
            fmt="%(asctime)s %(levelname)s %(name)s %(command)s %(run)s %(message)s",
            rename_fields={
                "asctime": "timestamp",
                "levelname": "level",
                "name": "logger",
            },
            datefmt="%Y-%m-%dT%H:%M:%S%z",
        )
    if json_format:
        logging.warning("python-json-logger not installed, falling back to plain text logs")
    return PlainRunFormatter(
        fmt="%(asctime)s │ %(levelname)-8s │ %(command)-8s │ %(name)-26s │ %(message)s",
        datefmt="%H:%M:%S",
    )


def setup_logging(
    level: str = "INFO",
    log_file: str | None = None,
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB
    backup_count: int = 5,
    json_format: bool = False,
) -> logging.Logger:
    """
    Configure logging for the `src` package.

    Records go to stderr (stdout carries the CLI status lines) and, with
    log_file, to a rotating file plus a sibling errors.log. Returns the package
    logger.

    Args:
        level: Log level for the package hierarchy (DEBUG, INFO, WARNING, ...)
        log_file: Path to log file (None = stderr only)
        max_bytes: Max log file size before rotation
        backup_count: Number of rotated files to keep
        json_format: One JSON document per record (True) or aligned text (False)
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.WARNING)
    root_logger.handlers.clear()

    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    formatter = _make_formatter(json_format)
    context = RunContextFilter()

    def attach(handler: logging.Handler, handler_level: int) -> None:
        handler.setLevel(handler_level)
        handler.setFormatter(formatter)
        handler.addFilter(context)
        root_logger.addHandler(handler)

    attach(logging.StreamHandler(sys.stderr), logging.DEBUG)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        for path, handler_level in ((log_path, logging.DEBUG), (log_path.parent / "errors.log", logging.ERROR)):
            attach(
                logging.handlers.RotatingFileHandler(
                    filename=str(path),
                    maxBytes=max_bytes,
                    backupCount=backup_count,
                    encoding="utf-8",
                ),
                handler_level,
            )

    for noisy in QUIET_LOGGERS:
        logging.getLogger(noisy).setLevel(logging.WARNING)

    return package_logger
