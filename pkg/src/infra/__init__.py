"""
DelaySSM — Infrastructure module.
Structured logging.
"""

from src.infra.logging_config import bind_run, setup_logging

__all__ = ["bind_run", "setup_logging"]
