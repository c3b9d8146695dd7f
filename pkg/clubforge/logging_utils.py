"""
Logging utilities for clubforge.

This module provides structured JSON logging with consistent formatting and
configurable log levels. Records go to stderr so that stdout stays reserved
for the JSON documents the CLI produces.
"""

import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Callable, Dict, Optional

TOOL_NAME = 'clubforge'
LOG_LEVEL_ENV = 'CLUBFORGE_LOG_LEVEL'
DEFAULT_LOG_LEVEL = 'WARNING'

_managed_loggers: Dict[str, logging.Logger] = {}
# run id of the current CLI invocation, shared by every logger
_run_id: Optional[str] = None


class StructuredFormatter(logging.Formatter):
    """
    Formatter that outputs one compact JSON object per record.

    Every entry names the tool and its version so that logs collected from
    several runs can be told apart.
    """

    def __init__(self) -> None:
        super().__init__()
        from . import __version__
        self.tool_version = __version__
        self.pid = os.getpid()

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record as structured JSON.

        Args:
            record: The log record to format

        Returns:
            str: JSON-formatted log entry
        """
        log_entry: Dict[str, Any] = {
            'timestamp': datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'tool': TOOL_NAME,
            'tool_version': self.tool_version,
            'pid': self.pid,
        }

        if hasattr(record, 'run_id'):
            log_entry['run_id'] = record.run_id

        if hasattr(record, 'duration_ms'):
            log_entry['duration_ms'] = record.duration_ms

        if hasattr(record, 'extra_fields'):
            log_entry.update(record.extra_fields)

        if record.exc_info:
            log_entry['exception'] = {
                'type': record.exc_info[0].__name__ if record.exc_info[0] else None,
                'message': str(record.exc_info[1]) if record.exc_info[1] else None,
                'traceback': self.formatException(record.exc_info),
            }

        return json.dumps(log_entry, default=str, separators=(',', ':'))


class ClubforgeLogger:
    """
    Logger facade used throughout the package.

    Keyword arguments given to the level methods become fields of the JSON
    record.
    """

    def __init__(self, name: str):
        """
        Initialize the logger.

        Args:
            name: Logger name (typically __name__ from calling module)
        """
        self.logger = logging.getLogger(name)
        self._setup_logger()
        self._run_id: Optional[str] = None

    def _setup_logger(self) -> None:
        """Attach the structured stderr handler once per named logger."""
        if self.logger.handlers:
            return

        log_level = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
        self.logger.setLevel(getattr(logging, log_level, logging.WARNING))

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(StructuredFormatter())
        self.logger.addHandler(handler)
        self.logger.propagate = False
        _managed_loggers[self.logger.name] = self.logger

    def set_run_id(self, run_id: str) -> None:
        """Tag every subsequent record of this instance with its own run id."""
        self._run_id = run_id

    def _log_with_context(self, level: int, message: str,
                          extra_fields: Optional[Dict[str, Any]] = None) -> None:
        extra: Dict[str, Any] = {}

        run_id = self._run_id or _run_id
        if run_id:
            extra['run_id'] = run_id

        if extra_fields:
            extra['extra_fields'] = extra_fields

        self.logger.log(level, message, extra=extra)

    def debug(self, message: str, **kwargs: Any) -> None:
        """Log debug message."""
        self._log_with_context(logging.DEBUG, message, kwargs)

    def info(self, message: str, **kwargs: Any) -> None:
        """Log info message."""
        self._log_with_context(logging.INFO, message, kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        """Log warning message."""
        self._log_with_context(logging.WARNING, message, kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        """Log error message."""
        self._log_with_context(logging.ERROR, message, kwargs)

    def critical(self, message: str, **kwargs: Any) -> None:
        """Log critical message."""
        self._log_with_context(logging.CRITICAL, message, kwargs)

    def log_performance(self, operation: str, duration_ms: float, **kwargs: Any) -> None:
        """
        Log performance metrics for an operation.

        Args:
            operation: Name of the operation
            duration_ms: Duration in milliseconds
            **kwargs: Additional metrics to log
        """
        metrics = {
            'operation': operation,
            'duration_ms': duration_ms,
            **kwargs,
        }
        self.info(f"Performance: {operation} completed", **metrics)


def get_logger(name: str) -> ClubforgeLogger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__ from calling module)

    Returns:
        ClubforgeLogger: Configured logger instance
    """
    return ClubforgeLogger(name)


def set_log_level(level: str) -> None:
    """Change the level of every logger created through get_logger."""
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")
    for managed in _managed_loggers.values():
        managed.setLevel(numeric)


def performance_timer(operation_name: str) -> Callable:
    """
    Decorator to log the duration and outcome of coarse operations.

    Args:
        operation_name: Name of the operation being timed

    Returns:
        Decorator function
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            logger = get_logger(func.__module__)
            start_time = time.time()

            try:
                result = func(*args, **kwargs)
                duration_ms = (time.time() - start_time) * 1000
                logger.log_performance(operation_name, duration_ms, success=True)
                return result
            except Exception as e:
                duration_ms = (time.time() - start_time) * 1000
                logger.log_performance(operation_name, duration_ms, success=False, error=str(e))
                raise

        return wrapper
    return decorator


def log_run_context(command: str, **fields: Any) -> None:
    """
    Log the CLI invocation at the start of a run.

    Every logger, including ones created later through get_logger, tags its
    records with the run id set here.

    Args:
        command: Subcommand being executed
        **fields: Parsed options worth recording
    """
    global _run_id
    _run_id = f"{os.getpid()}-{int(time.time() * 1000)}"
    get_logger(__name__).info("Run started", command=command, **fields)


def current_run_id() -> Optional[str]:
    return _run_id


def reset_run_id() -> None:
    """Forget the run id set by log_run_context."""
    global _run_id
    _run_id = None


logger = get_logger(__name__)
