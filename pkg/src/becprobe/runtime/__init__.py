"""
Runtime helpers for becprobe (logging, .env loading, tracebacks).
"""

from .env import load_env
from .logging import (
    configure_logging,
    current_log_dir,
    current_run,
    enter_run,
    get_logger,
    log,
    record_warning,
)
from .tracebacks import (
    format_traceback,
    install_rich_uncaught_exceptions,
    print_colored_traceback,
)

__all__ = [
    "configure_logging",
    "current_log_dir",
    "current_run",
    "enter_run",
    "format_traceback",
    "get_logger",
    "install_rich_uncaught_exceptions",
    "load_env",
    "log",
    "print_colored_traceback",
    "record_warning",
]
