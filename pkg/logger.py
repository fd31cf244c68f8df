#!/usr/bin/env python3
"""
Logging Module for the Ambiguity Toolkit.

Console logging goes to standard error, since standard output carries the
report documents the CLI emits. Settings come from the config layer:
LOG_LEVEL, LOG_FORMAT (standard, simple or json), LOG_FILE with rotation by
LOG_MAX_SIZE and LOG_BACKUP_COUNT, and LOG_COLORS for colorama output on a
terminal. Commands attach context (command name, seed, code size) that is
carried on every record they emit.

Usage:
    from logger import get_logger

    logger = get_logger('synthesis')
    with logger.timer('anneal'):
        run_annealer()
"""
import os
import sys
import json
import time
import logging
import logging.handlers
import contextlib
import contextvars
import functools
from dataclasses import dataclass
from typing import Any, Dict, Optional

from colorama import Fore, Style

from config import config

DEFAULT_MAX_BYTES = 10 * 1024 * 1024
SIMPLE_FORMAT = '%(levelname)s: %(message)s'
STANDARD_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

LEVEL_COLORS = {
    'DEBUG': Style.DIM + Fore.WHITE,
    'INFO': Fore.GREEN,
    'WARNING': Fore.YELLOW,
    'ERROR': Fore.RED,
    'CRITICAL': Fore.RED + Style.BRIGHT
}

# Attributes every LogRecord carries; anything else arrived through `extra`
_RECORD_ATTRS = frozenset(vars(logging.LogRecord('', 0, '', 0, '', (), None))) | {'message', 'asctime', 'context'}

_context: contextvars.ContextVar = contextvars.ContextVar('toolkit_log_context', default={})


@dataclass(frozen=True)
class LogSettings:
    level: int
    format: str
    file: Optional[str]
    max_bytes: int
    backup_count: int
    colors: bool


def logging_settings() -> LogSettings:
    """Read the logging keys through the typed getters; malformed values fall back to defaults."""
    level_name = (config.get('LOG_LEVEL', 'INFO') or 'INFO').upper()
    log_format = (config.get('LOG_FORMAT', 'standard') or 'standard').lower()
    return LogSettings(
        level=getattr(logging, level_name, logging.INFO),
        format=log_format if log_format in ('standard', 'simple', 'json') else 'standard',
        file=config.get('LOG_FILE') or None,
        max_bytes=max(0, config.get_int('LOG_MAX_SIZE', DEFAULT_MAX_BYTES)),
        backup_count=max(0, config.get_int('LOG_BACKUP_COUNT', 5)),
        colors=config.get_bool('LOG_COLORS', True),
    )


class ColorFormatter(logging.Formatter):
    """Wraps each formatted line in its level's color."""

    def __init__(self, fmt=None, use_colors=True):
        super().__init__(fmt)
        self.use_colors = use_colors

    def format(self, record):
        line = super().format(record)
        color = LEVEL_COLORS.get(record.levelname) if self.use_colors else None
        return f"{color}{line}{Style.RESET_ALL}" if color else line


class JsonFormatter(logging.Formatter):
    """One JSON object per record, with context and `extra` fields inlined."""

    def format(self, record):
        document: Dict[str, Any] = {
            'timestamp': self.formatTime(record),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'function': record.funcName,
            'line': record.lineno,
        }
        if record.exc_info:
            document['exception'] = self.formatException(record.exc_info)
        if getattr(record, 'context', None):
            document['context'] = record.context
        document.update({key: value for key, value in vars(record).items() if key not in _RECORD_ATTRS})
        return json.dumps(document, default=str)


class ContextAdapter(logging.LoggerAdapter):
    """Attaches the active command context to every record."""

    def process(self, msg, kwargs):
        extra = dict(kwargs.get('extra') or {})
        extra['context'] = get_context()
        kwargs['extra'] = extra
        return msg, kwargs

    @contextlib.contextmanager
    def timer(self, operation_name):
        """Log how long the block took, even when it raises."""
        start_time = time.perf_counter()
        try:
            yield
        finally:
            duration_ms = (time.perf_counter() - start_time) * 1000
            self.info(f"{operation_name} completed in {duration_ms:.2f}ms",
                      extra={'duration_ms': duration_ms, 'operation': operation_name})


def _formatter(settings: LogSettings, stream=None) -> logging.Formatter:
    if settings.format == 'json':
        return JsonFormatter()
    fmt = SIMPLE_FORMAT if settings.format == 'simple' else STANDARD_FORMAT
    if stream is None:
        return logging.Formatter(fmt)
    return ColorFormatter(fmt, use_colors=settings.colors and hasattr(stream, 'isatty') and stream.isatty())


def setup_logging(settings: Optional[LogSettings] = None):
    """Replace the root handlers with a stderr handler and, if LOG_FILE is set, a rotating file."""
    settings = settings or logging_settings()
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    root_logger.setLevel(settings.level)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(_formatter(settings, sys.stderr))
    root_logger.addHandler(console_handler)

    if settings.file:
        try:
            os.makedirs(os.path.dirname(settings.file) or '.', exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                settings.file, maxBytes=settings.max_bytes, backupCount=settings.backup_count
            )
            file_handler.setFormatter(_formatter(settings))
            root_logger.addHandler(file_handler)
        except OSError as e:
            root_logger.warning(f"Failed to set up file logging: {e}")

    return root_logger


setup_logging()


def get_logger(name):
    """Logger for `name` wrapped in the context adapter."""
    return ContextAdapter(logging.getLogger(name), {})


def get_context() -> Dict[str, Any]:
    return dict(_context.get())


@contextlib.contextmanager
def context(**kwargs):
    """Add context fields for the duration of the block."""
    token = _context.set({**_context.get(), **kwargs})
    try:
        yield
    finally:
        _context.reset(token)


def log_function_call(logger):
    """Debug-log entry, exit and duration of the decorated function."""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug(f"Calling {func.__name__}")
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.debug(f"{func.__name__} raised {type(e).__name__} after "
                             f"{(time.perf_counter() - start_time) * 1000:.2f}ms")
                raise
            logger.debug(f"{func.__name__} returned in {(time.perf_counter() - start_time) * 1000:.2f}ms")
            return result

        return wrapper

    return decorator
