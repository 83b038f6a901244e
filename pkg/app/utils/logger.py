import logging
import sys
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from pythonjsonlogger import jsonlogger

from config import settings

MAX_LOG_BYTES = 10 * 1024 * 1024
JSON_FORMAT = '%(timestamp)s %(level)s %(logger)s %(module)s %(function)s %(message)s'


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """JSON records with timestamp, level, logger, module and function"""

    def add_fields(self, log_record, record, message_dict):
        super().add_fields(log_record, record, message_dict)
        log_record['timestamp'] = datetime.now(timezone.utc).isoformat()
        log_record['level'] = record.levelname
        log_record['logger'] = record.name
        log_record['module'] = record.module
        log_record['function'] = record.funcName


def _rotating(path: Path, level: int, backups: int) -> RotatingFileHandler:
    handler = RotatingFileHandler(path, maxBytes=MAX_LOG_BYTES, backupCount=backups)
    handler.setLevel(level)
    handler.setFormatter(CustomJsonFormatter(JSON_FORMAT))
    return handler


def setup_logging(level: Optional[str] = None):
    """
    Configure interpreter logging

    Console output goes to stderr so reports on stdout stay parseable. With LOG_TO_FILE,
    every record is also written as JSON to LOG_FILE_PATH and errors to error.log beside it.

    Args:
        level: Overrides settings.LOG_LEVEL (e.g. from a --verbose flag)
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, (level or settings.LOG_LEVEL).upper()))
    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(root_logger.level)
    console_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    root_logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        log_path = Path(settings.LOG_FILE_PATH)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        root_logger.addHandler(_rotating(log_path, logging.DEBUG, backups=10))
        root_logger.addHandler(_rotating(log_path.parent / 'error.log', logging.ERROR, backups=5))

    # Earley parsing is chatty at DEBUG
    logging.getLogger('lark').setLevel(logging.WARNING)

    logging.debug("Logging configured")
