import json
import logging

from app.utils import logger as logging_setup


def test_console_level():
    logging_setup.setup_logging("DEBUG")
    assert logging.getLogger().level == logging.DEBUG
    assert logging.getLogger("lark").level == logging.WARNING
    logging_setup.setup_logging("WARNING")


def test_json_file(monkeypatch, tmp_path):
    path = tmp_path / "logs" / "dlpaw.log"
    monkeypatch.setattr(logging_setup.settings, "LOG_TO_FILE", True)
    monkeypatch.setattr(logging_setup.settings, "LOG_FILE_PATH", str(path))
    logging_setup.setup_logging("INFO")
    logging.getLogger("app.services.machine").info("Fuel exhausted after 3 steps")
    for handler in logging.getLogger().handlers:
        handler.flush()
    records = [json.loads(line) for line in path.read_text().splitlines()]
    record = records[-1]
    assert record["message"] == "Fuel exhausted after 3 steps"
    assert record["level"] == "INFO"
    assert record["logger"] == "app.services.machine"
    monkeypatch.setattr(logging_setup.settings, "LOG_TO_FILE", False)
    logging_setup.setup_logging("WARNING")
