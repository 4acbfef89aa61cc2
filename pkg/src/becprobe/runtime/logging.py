import contextlib
import contextvars
import dataclasses
import datetime
import logging
import os
import sys
import threading
from pathlib import Path
from typing import Generator

from rich.console import Console
from rich.text import Text
from rich.traceback import Traceback

from ..config import BECPROBE_CONFIG

LOG_FILE = "becprobe.log"
NAMESPACE = "becprobe"


@dataclasses.dataclass(frozen=True)
class _ActiveRun:
    directory: Path
    warnings: list[str]


_ACTIVE_RUNS: contextvars.ContextVar[tuple[_ActiveRun, ...]] = contextvars.ContextVar(
    "becprobe_active_runs", default=()
)
_FILE_LOCK = threading.Lock()
_CONSOLE_LOCK = threading.Lock()


@contextlib.contextmanager
def enter_run(directory: Path) -> Generator[list[str], None, None]:
    """
    Route logging to `directory / becprobe.log` while the context is open.

    Yields the list that `record_warning()` appends to. Runs nest: an inner run keeps
    its own warnings and the outer run resumes when it exits.
    """
    configure_logging()
    run = _ActiveRun(directory=directory, warnings=[])
    token = _ACTIVE_RUNS.set((*_ACTIVE_RUNS.get(), run))
    try:
        yield run.warnings
    finally:
        _ACTIVE_RUNS.reset(token)


def current_run() -> Path | None:
    """Directory of the innermost active run."""
    runs = _ACTIVE_RUNS.get()
    return runs[-1].directory if runs else None


def current_log_dir() -> Path:
    return current_run() or BECPROBE_CONFIG.base_root


def record_warning(message: str) -> None:
    """Log a warning and attach it (once) to the active run's manifest."""
    runs = _ACTIVE_RUNS.get()
    if runs and message not in runs[-1].warnings:
        runs[-1].warnings.append(message)
    get_logger().warning(message)


def _in_namespace(record: logging.LogRecord) -> bool:
    return record.name == NAMESPACE or record.name.startswith(f"{NAMESPACE}.")


def _location(record: logging.LogRecord) -> str:
    caller_file = getattr(record, "becprobe_caller_file", None)
    caller_line = getattr(record, "becprobe_caller_line", None)
    if isinstance(caller_file, str) and isinstance(caller_line, int):
        return f"{Path(caller_file).name}:{caller_line}"
    filename = Path(record.pathname).name if record.pathname else "<unknown>"
    return f"{filename}:{record.lineno}"


class _LogFormatter(logging.Formatter):
    def formatTime(  # noqa: N802 - keep logging.Formatter API
        self, record: logging.LogRecord, datefmt: str | None = None
    ) -> str:
        stamp = datetime.datetime.fromtimestamp(record.created, tz=datetime.timezone.utc)
        return stamp.isoformat(timespec="seconds")

    def format(self, record: logging.LogRecord) -> str:
        record.becprobe_location = _location(record)  # type: ignore[attr-defined]
        return super().format(record)


class _RunFileHandler(logging.Handler):
    """Appends to the log file of whichever run is active when the record is emitted."""

    def emit(self, record: logging.LogRecord) -> None:
        # Outside a run only our own loggers reach the base-root log.
        if current_run() is None and not _in_namespace(record):
            return
        if getattr(record, "becprobe_console_only", False):
            return
        message = self.format(record)
        directory = current_log_dir()
        directory.mkdir(parents=True, exist_ok=True)
        with _FILE_LOCK, (directory / LOG_FILE).open("a", encoding="utf-8") as fp:
            fp.write(f"{message}\n")


_LEVEL_STYLES = (
    (logging.ERROR, "red"),
    (logging.WARNING, "yellow"),
    (logging.INFO, "blue"),
)


class _RichConsoleHandler(logging.Handler):
    def __init__(self, *, level: int) -> None:
        super().__init__(level=level)
        self._console = Console(stderr=True)

    @staticmethod
    def _format_location(record: logging.LogRecord) -> str:
        return f"[{_location(record)}]"

    def filter(self, record: logging.LogRecord) -> bool:
        if getattr(record, "becprobe_file_only", False):
            return False
        return _in_namespace(record) and super().filter(record)

    def emit(self, record: logging.LogRecord) -> None:
        style = next((s for level, s in _LEVEL_STYLES if record.levelno >= level), "magenta")
        stamp = datetime.datetime.fromtimestamp(record.created, tz=datetime.timezone.utc)

        line = Text()
        line.append(stamp.strftime("%H:%M:%S"), style="dim")
        line.append(" ")
        line.append(self._format_location(record), style=style)
        run = current_run()
        if run is not None:
            line.append(f" {run.name}", style="cyan")
        line.append(" ")
        line.append(record.getMessage())

        with _CONSOLE_LOCK:
            self._console.print(line)
            if record.exc_info and record.exc_info[1] is not None:
                exc_type, exc_value, tb = record.exc_info
                self._console.print(
                    Traceback.from_exception(exc_type, exc_value, tb, show_locals=False)  # type: ignore[arg-type]
                )


def _console_level() -> int:
    level = os.getenv("BECPROBE_LOG_LEVEL", "INFO").upper()
    return logging.getLevelNamesMapping().get(level, logging.INFO)


def configure_logging() -> None:
    """
    Install the run-routed file handler and the rich console handler on the root
    logger. Idempotent.

    Inside a run, every propagating stdlib logger lands in that run's `becprobe.log`;
    the console only shows the `becprobe` namespace.
    """
    root = logging.getLogger()
    if not any(isinstance(h, _RunFileHandler) for h in root.handlers):
        handler = _RunFileHandler(level=logging.DEBUG)
        handler.setFormatter(
            _LogFormatter("%(asctime)s [%(levelname)s] %(name)s %(becprobe_location)s %(message)s")
        )
        root.addHandler(handler)
    if not any(isinstance(h, _RichConsoleHandler) for h in root.handlers):
        root.addHandler(_RichConsoleHandler(level=_console_level()))


def get_logger() -> logging.Logger:
    configure_logging()
    logger = logging.getLogger(NAMESPACE)
    logger.setLevel(logging.DEBUG)
    return logger


def log(message: str, *, level: str = "INFO") -> Path:
    """
    Log `message` attributed to the first caller outside the package.

    Returns the log file written to: the active run's, or the one under
    `BECPROBE_CONFIG.base_root`.
    """
    level_no = logging.getLevelNamesMapping().get(level.upper())
    if level_no is None:
        raise ValueError(f"Unknown log level: {level!r}")

    package_dir = str(Path(__file__).parent.parent)
    frame = sys._getframe(1)
    while frame is not None and frame.f_code.co_filename.startswith(package_dir):
        frame = frame.f_back
    extra: dict[str, object] = {}
    if frame is not None:
        extra = {"becprobe_caller_file": frame.f_code.co_filename, "becprobe_caller_line": frame.f_lineno}

    get_logger().log(level_no, message, extra=extra)
    return current_log_dir() / LOG_FILE
