"""
DelaySSM — Output writers.
Plot-ready CSV files with fixed number formatting, YAML reports, and the coloured
status lines printed by the command-line front end.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from enum import Enum
from pathlib import Path

import numpy as np
import yaml
from colorama import Fore, Style, init

init(autoreset=True)

logger = logging.getLogger(__name__)

STATUS_COLORS = {
    "PASS": Fore.GREEN,
    "WARN": Fore.YELLOW,
    "FAIL": Fore.RED,
    "INFO": Fore.CYAN,
}


def _cell(value, precision: int) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{precision}g}"
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    precision: int = 10,
) -> Path:
    """Rows are written in the given order; floats as %.{precision}g."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v, precision) for v in row])
            count += 1
    logger.info(f"Wrote {path.name} ({count} rows)", extra={"props": {"path": str(path)}})
    return path


def _plain(value):
    """numpy / enum / complex values as YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def write_report(path: Path, report: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(_plain(report), f, sort_keys=False, default_flow_style=False)
    logger.info(f"Wrote {path.name}", extra={"props": {"path": str(path)}})
    return path


def print_status(status: str, label: str, detail: str = "") -> None:
    color = STATUS_COLORS.get(status, "")
    suffix = f"  {detail}" if detail else ""
    print(f"{color}{status:<4}{Style.RESET_ALL} {label}{suffix}")
