"""
Tests for the logging setup — run context, props fields, file rotation targets.
"""

import json
import logging

import pytest

from src.infra.logging_config import PACKAGE_LOGGER, bind_run, setup_logging


def _flush():
    for handler in logging.getLogger().handlers:
        handler.flush()


# ============================================
# Logging setup
# ============================================
class TestLoggingSetup:
    def setup_method(self):
        self.root_handlers = list(logging.getLogger().handlers)
        self.root_level = logging.getLogger().level

    def teardown_method(self):
        root = logging.getLogger()
        for handler in root.handlers:
            handler.close()
        root.handlers[:] = self.root_handlers
        root.setLevel(self.root_level)
        logging.getLogger(PACKAGE_LOGGER).setLevel(logging.NOTSET)
        bind_run("-", "-")

    def test_json_records_carry_run_and_props(self, tmp_path):
        pytest.importorskip("pythonjsonlogger")
        log_file = tmp_path / "logs" / "run.log"
        setup_logging(level="DEBUG", log_file=str(log_file), json_format=True)
        bind_run("predict", "duffing_isola")

        logging.getLogger("src.analysis.frc").info("FRC computed", extra={"props": {"branches": 2, "epsilon": 9e-4}})
        _flush()

        record = json.loads(log_file.read_text(encoding="utf-8").strip().splitlines()[-1])
        assert record["message"] == "FRC computed"
        assert record["logger"] == "src.analysis.frc"
        assert record["level"] == "INFO"
        assert record["command"] == "predict"
        assert record["run"] == "duffing_isola"
        assert record["branches"] == 2
        assert record["epsilon"] == 9e-4
        assert "props" not in record

    def test_errors_file_gets_errors_only(self, tmp_path):
        log_file = tmp_path / "run.log"
        setup_logging(level="INFO", log_file=str(log_file))
        log = logging.getLogger("src.spectral.eigen")
        log.info("Spectrum computed")
        log.error("dense eigensolver failed")
        _flush()

        errors = (tmp_path / "errors.log").read_text(encoding="utf-8")
        assert "dense eigensolver failed" in errors
        assert "Spectrum computed" not in errors
        assert "Spectrum computed" in log_file.read_text(encoding="utf-8")

    def test_plain_text_appends_props(self, tmp_path):
        log_file = tmp_path / "run.log"
        setup_logging(level="INFO", log_file=str(log_file))
        bind_run("ssm", "duffing_post")
        logging.getLogger("src.ssm.expansion").info("SSM computed", extra={"props": {"order": 5}})
        _flush()

        line = log_file.read_text(encoding="utf-8").strip().splitlines()[-1]
        assert "ssm" in line
        assert line.endswith("order=5")

    def test_package_level_leaves_third_party_at_warning(self, tmp_path):
        log_file = tmp_path / "run.log"
        package = setup_logging(level="DEBUG", log_file=str(log_file))
        assert package.name == PACKAGE_LOGGER
        assert package.getEffectiveLevel() == logging.DEBUG
        logging.getLogger("scipy").info("not shown")
        logging.getLogger("src.chain.chain_system").debug("chain assembled")
        _flush()

        text = log_file.read_text(encoding="utf-8")
        assert "chain assembled" in text
        assert "not shown" not in text
